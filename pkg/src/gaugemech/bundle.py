"""Trivialized principal G-bundles: action lifts, momentum map, dual Atiyah maps.

A bundle is either a product M x G over an open box M in R^d, or the total
space of a semidirect product K x| N viewed over K with fiber N.  In both
cases a point is (base, u) with u in the structure group, the right action
fixes the base and right-multiplies the fiber, and tangent/cotangent data
uses the frame induced by the trivialization:

    tangent  (dbase, xi)   -- base velocity + left-trivialized fiber velocity
    covector (a, b)        -- pairing <(a,b), (dbase, xi)> = a.dbase + b.xi

In this frame T kappa_g = diag(I, Ad_{g^-1}), the vertical lift is
T kappa_p(e) X = (0, X), and the momentum map J(phi) = phi o T kappa_p(e)
reads off the fiber covector components.  Quotients by G are represented by
the gauge-fixed representative on the fiber-identity slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .liealg import LieGroupSpec, expm
from .report import SuiteReport
from .rng import stream

Array = np.ndarray

ALGEBRAIC_TOL = 1e-10
FD_TOL = 1e-9
FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# connection data: polynomial local connection coefficients
# ---------------------------------------------------------------------------

Monomial = tuple[float, tuple[int, ...]]


@dataclass
class ConnectionData:
    """Local connection coefficients A: M -> g-valued one-forms.

    ``terms[i][k]`` lists monomials (coef, exponents) of the polynomial
    A_i^k(m), so the g-valued one-form is A(m) dm with matrix
    A(m)[k, i] = A_i^k(m).  Degree <= 3 keeps the JSON format closed.
    The induced connection form on TP in the trivialized frame is

        alpha_p(dbase, xi) = Ad_{u^-1}( A(base) dbase ) + xi.
    """

    base_dim: int
    fiber_dim: int
    terms: list[list[list[Monomial]]]

    @staticmethod
    def flat(base_dim: int, fiber_dim: int) -> "ConnectionData":
        terms = [[[] for _ in range(fiber_dim)] for _ in range(base_dim)]
        return ConnectionData(base_dim, fiber_dim, terms)

    @staticmethod
    def from_matrix(mat: Array) -> "ConnectionData":
        """Constant coefficients: A[k, i] = mat[k, i]."""
        mat = np.asarray(mat, dtype=float)
        n, d = mat.shape
        terms = [[([(float(mat[k, i]), (0,) * d)] if mat[k, i] != 0 else []) for k in range(n)] for i in range(d)]
        return ConnectionData(d, n, terms)

    def matrix(self, m: Array) -> Array:
        """Evaluate A(m) as an (n, d) matrix acting on base velocities."""
        a = np.zeros((self.fiber_dim, self.base_dim))
        for i in range(self.base_dim):
            for k in range(self.fiber_dim):
                a[k, i] = _poly_eval(self.terms[i][k], m)
        return a

    def curvature_two_form(self, m: Array) -> Array:
        """Exact exterior derivative dA: array F[i, j, k] = (dA^k)(e_i, e_j)."""
        d, n = self.base_dim, self.fiber_dim
        f = np.zeros((d, d, n))
        for k in range(n):
            for i in range(d):
                for j in range(d):
                    f[i, j, k] = _poly_eval(_poly_partial(self.terms[j][k], i), m) - _poly_eval(
                        _poly_partial(self.terms[i][k], j), m
                    )
        return f

    def to_json(self) -> dict:
        return {
            "A": [
                [[[c, list(e)] for c, e in self.terms[i][k]] for k in range(self.fiber_dim)]
                for i in range(self.base_dim)
            ]
        }

    @staticmethod
    def from_json(doc: dict, base_dim: int, fiber_dim: int) -> "ConnectionData":
        raw = doc.get("A", [])
        terms: list[list[list[Monomial]]] = [[[] for _ in range(fiber_dim)] for _ in range(base_dim)]
        for i, per_base in enumerate(raw):
            for k, monos in enumerate(per_base):
                parsed = [(float(c), tuple(int(x) for x in e)) for c, e in monos]
                for _, exps in parsed:
                    if sum(exps) > 3:
                        raise ValueError("connection coefficients are restricted to polynomial degree <= 3")
                terms[i][k] = parsed
        return ConnectionData(base_dim, fiber_dim, terms)


def _poly_eval(monos: list[Monomial], m: Array) -> float:
    total = 0.0
    for c, exps in monos:
        v = c
        for x, e in zip(m, exps):
            if e:
                v *= x**e
        total += v
    return total


def _poly_partial(monos: list[Monomial], i: int) -> list[Monomial]:
    out = []
    for c, exps in monos:
        if exps[i] > 0:
            new = list(exps)
            new[i] -= 1
            out.append((c * exps[i], tuple(new)))
    return out


# ---------------------------------------------------------------------------
# points and samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Point:
    """Bundle point: base coordinates (vector) or base group element (matrix), plus fiber element."""

    base: Array
    fiber: Array


@dataclass(frozen=True)
class CotangentSample:
    """Covector phi at a point, components (a, b) in the trivialized frame."""

    point: Point
    a: Array
    b: Array

    @property
    def coords(self) -> Array:
        return np.concatenate([self.a, self.b])


@dataclass(frozen=True)
class QuotientClass:
    """Class <phi> in T*P/G by its gauge-fixed representative (fiber = identity)."""

    rep: CotangentSample


@dataclass
class BundleSpec:
    """A trivialized principal bundle P(M, G) with a connection.

    kind "TrivialProduct": base is an open box, ``base_box`` of shape (d, 2).
    kind "SemidirectTotal": base is the group K (``base_group``); connection
    coefficients must vanish there (the section k -> (k, e) supplies the
    horizontal distribution).
    """

    kind: str
    group: LieGroupSpec
    connection: ConnectionData
    base_box: Array | None = None
    base_group: LieGroupSpec | None = None
    semidirect: Any = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("TrivialProduct", "SemidirectTotal"):
            raise ValueError(f"unknown bundle kind {self.kind!r}")
        if self.kind == "TrivialProduct":
            self.base_box = np.asarray(self.base_box, dtype=float).reshape(-1, 2)
        else:
            if self.base_group is None:
                raise ValueError("SemidirectTotal requires base_group")
            if any(any(monos for monos in per_base) for per_base in self.connection.terms):
                raise ValueError("SemidirectTotal uses the section connection; coefficients must vanish")
        if not self.name:
            self.name = f"{self.kind}[{self.group.name}]"

    # -- dimensions -----------------------------------------------------------

    @property
    def d(self) -> int:
        if self.kind == "TrivialProduct":
            return self.base_box.shape[0]
        return self.base_group.dim

    @property
    def n(self) -> int:
        return self.group.dim

    @property
    def tangent_dim(self) -> int:
        return self.d + self.n

    # -- sampling -------------------------------------------------------------

    def random_base(self, rng: np.random.Generator) -> Array:
        if self.kind == "TrivialProduct":
            lo, hi = self.base_box[:, 0], self.base_box[:, 1]
            return lo + (hi - lo) * rng.uniform(0.1, 0.9, size=self.d)
        return self.base_group.random_element(rng, scale=0.4)

    def random_point(self, rng: np.random.Generator, scale: float = 0.5) -> Point:
        return Point(self.random_base(rng), self.group.random_element(rng, scale))

    def random_tangent(self, rng: np.random.Generator, scale: float = 1.0) -> Array:
        return scale * rng.standard_normal(self.tangent_dim)

    def random_cotangent(self, rng: np.random.Generator, scale: float = 1.0, point: Point | None = None) -> CotangentSample:
        p = self.random_point(rng) if point is None else point
        return CotangentSample(p, scale * rng.standard_normal(self.d), scale * rng.standard_normal(self.n))

    # -- point arithmetic -------------------------------------------------------

    def base_move(self, base: Array, delta: Array, t: float = 1.0) -> Array:
        if self.kind == "TrivialProduct":
            return base + t * np.asarray(delta, dtype=float)
        return base @ self.base_group.exp(t * np.asarray(delta, dtype=float))

    def move(self, point: Point, tangent: Array, t: float = 1.0) -> Point:
        dbase, xi = tangent[: self.d], tangent[self.d :]
        return Point(self.base_move(point.base, dbase, t), point.fiber @ expm(t * self.group.from_coords(xi)))

    def base_distance(self, b1: Array, b2: Array) -> float:
        return float(np.linalg.norm(np.asarray(b1) - np.asarray(b2)))

    def point_distance(self, p: Point, q: Point) -> float:
        return self.base_distance(p.base, q.base) + float(np.linalg.norm(p.fiber - q.fiber))

    # -- the principal action and its lifts -------------------------------------

    def act(self, point: Point, g: Array) -> Point:
        """kappa(p, g) = p g: fixes the base, right-multiplies the fiber."""
        return Point(point.base, point.fiber @ g)

    def kappa_p(self, point: Point, g: Array) -> Point:
        return self.act(point, g)

    def tk_g(self, g: Array) -> Array:
        """Matrix of T kappa_g(p) on tangent coordinates: diag(I, Ad_{g^-1})."""
        out = np.eye(self.tangent_dim)
        out[self.d :, self.d :] = self.group.Ad(np.linalg.inv(g))
        return out

    def tk_p_e(self) -> Array:
        """Matrix of the vertical lift T kappa_p(e): g -> T_p P, X -> (0, X)."""
        out = np.zeros((self.tangent_dim, self.n))
        out[self.d :, :] = np.eye(self.n)
        return out

    def vertical_lift(self, x: Array) -> Array:
        return self.tk_p_e() @ np.asarray(x, dtype=float)

    def cot_act(self, sample: CotangentSample, g: Array) -> CotangentSample:
        """T* kappa_g(p) phi = phi o T kappa_g(p)^{-1} at the moved point."""
        b = self.group.Ad_star(g) @ sample.b
        return CotangentSample(self.act(sample.point, g), sample.a.copy(), b)

    # -- connection form ---------------------------------------------------------

    def base_coords_for_connection(self, base: Array) -> Array:
        if self.kind == "TrivialProduct":
            return base
        return np.zeros(self.d)  # section connection: A == 0 on a group base

    def alpha(self, point: Point, tangent: Array) -> Array:
        """Connection one-form alpha_p in the trivialized frame."""
        dbase, xi = tangent[: self.d], tangent[self.d :]
        a_mat = self.connection.matrix(self.base_coords_for_connection(point.base))
        u_inv = np.linalg.inv(point.fiber)
        return self.group.Ad(u_inv) @ (a_mat @ dbase) + xi

    def horizontal(self, point: Point, tangent: Array) -> Array:
        """Horizontal part of a tangent vector: subtract the vertical lift of alpha."""
        return tangent - self.vertical_lift(self.alpha(point, tangent))

    # -- canonical one-form, momentum map ----------------------------------------

    def gamma(self, sample: CotangentSample, tangent: Array) -> float:
        """Canonical one-form of T*P paired with a base-motion tangent (dbase, xi)."""
        return float(sample.a @ tangent[: self.d] + sample.b @ tangent[self.d :])

    def check_sample(self, sample: CotangentSample) -> None:
        coords = sample.coords
        if coords.shape != (self.tangent_dim,) or not np.all(np.isfinite(coords)):
            raise ValueError("invalid cotangent sample: wrong shape or non-finite covector")
        if not np.all(np.isfinite(sample.point.fiber)):
            raise ValueError("invalid cotangent sample: non-finite fiber element")

    def momentum(self, sample: CotangentSample) -> Array:
        """J(phi) = phi o T kappa_p(e), computed as the n vertical pairings."""
        self.check_sample(sample)
        lift = self.tk_p_e()
        return np.array([float(sample.coords @ lift[:, k]) for k in range(self.n)])

    def equivariance_residual(self, sample: CotangentSample, g: Array) -> float:
        """|| J(phi . g) - J(phi) o Ad_g ||.

        J(phi) o Ad_g is the coadjoint transport matching the lifted right
        action (Ad*_g in this package's convention).
        """
        lhs = self.momentum(self.cot_act(sample, g))
        rhs = self.group.Ad_star(g) @ self.momentum(sample)
        return float(np.linalg.norm(lhs - rhs))

    # -- quotient representatives --------------------------------------------------

    def quotient_rep(self, sample: CotangentSample) -> QuotientClass:
        """Gauge-fixed representative of <phi>: act with T*kappa_{u^-1}."""
        u_inv = np.linalg.inv(sample.point.fiber)
        rep = self.cot_act(sample, u_inv)
        rep = CotangentSample(Point(rep.point.base, self.group.identity()), rep.a, rep.b)
        return QuotientClass(rep)

    def class_coords(self, cls: QuotientClass) -> Array:
        return cls.rep.coords

    def class_distance(self, c1: QuotientClass, c2: QuotientClass) -> float:
        return self.base_distance(c1.rep.point.base, c2.rep.point.base) + float(
            np.linalg.norm(c1.rep.coords - c2.rep.coords)
        )

    # -- dual Atiyah sequence maps ----------------------------------------------

    def i_star(self, sample: CotangentSample) -> tuple[Point, Array]:
        """I*(phi) = (pi*(phi), J(phi)): the bundle epimorphism T*P -> P x g*."""
        return sample.point, self.momentum(sample)

    def iota_star(self, cls: QuotientClass) -> tuple[Array, Array]:
        """iota* on a quotient class: gauge-fixed pair (base, J(rep))."""
        return cls.rep.point.base, self.momentum(cls.rep)

    def a_star(self, base: Array, rho: Array) -> QuotientClass:
        """Dual anchor: rho in T*(P/G) -> class of the mu-pullback (rho, 0)."""
        rho = np.asarray(rho, dtype=float)
        if rho.shape != (self.d,):
            raise ValueError("dimension mismatch in a_star")
        rep = CotangentSample(Point(base, self.group.identity()), rho.copy(), np.zeros(self.n))
        return QuotientClass(rep)

    def sigma(self, base: Array, chi: Array) -> QuotientClass:
        """Section of iota* induced by the connection: sigma = [alpha~]*.

        At the gauge-fixed point the covector is chi o alpha_p, i.e.
        (A(base)^T chi, chi) in the trivialized frame.
        """
        chi = np.asarray(chi, dtype=float)
        a_mat = self.connection.matrix(self.base_coords_for_connection(base))
        rep = CotangentSample(Point(base, self.group.identity()), a_mat.T @ chi, chi.copy())
        return QuotientClass(rep)

    def sigma_tilde(self, cls: QuotientClass) -> Array:
        """Projection T*P/G -> T*(P/G) defined by sigma through the affine action."""
        base, chi = self.iota_star(cls)
        return cls.rep.a - self.sigma(base, chi).rep.a


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------


def action_suite(b: BundleSpec, samples: int = 25, seed: int = 0, tol: float = ALGEBRAIC_TOL) -> SuiteReport:
    """Check the composition/inversion/cocycle identities of the lifted action."""
    rep = SuiteReport(f"bundle.action[{b.name}]")
    rng = stream(seed, f"bundle.action/{b.name}")
    G = b.group
    w = {k: 0.0 for k in ("w1", "w2", "w3", "w4", "w6", "w7", "w8", "duality", "unit", "vert_equivariance")}
    for _ in range(samples):
        p = b.random_point(rng)
        g = G.random_element(rng)
        h = G.random_element(rng)
        gi = np.linalg.inv(g)

        # (w1) kappa_g o kappa_p = kappa_p o R_g and (w3) kappa_{pg} = kappa_p o L_g
        w["w1"] = max(w["w1"], b.point_distance(b.act(b.kappa_p(p, h), g), b.kappa_p(p, h @ g)))
        w["w3"] = max(w["w3"], b.point_distance(b.kappa_p(b.act(p, g), h), b.kappa_p(p, g @ h)))
        # (w2) kappa_g o kappa_p = kappa_{pg} o I_{g^-1}
        w["w2"] = max(w["w2"], b.point_distance(b.act(b.kappa_p(p, h), g), b.kappa_p(b.act(p, g), gi @ h @ g)))

        # (w4) T kappa_{pg}(e) = T kappa_g(p) o T kappa_p(e) o Ad_g
        lhs = b.tk_p_e()
        rhs = b.tk_g(g) @ b.tk_p_e() @ G.Ad(g)
        w["w4"] = max(w["w4"], float(np.max(np.abs(lhs - rhs))))
        # (w6) inversion, (w7) cocycle, (w8) cotangent cocycle
        w["w6"] = max(w["w6"], float(np.max(np.abs(np.linalg.inv(b.tk_g(g)) - b.tk_g(gi)))))
        w["w7"] = max(w["w7"], float(np.max(np.abs(b.tk_g(g @ h) - b.tk_g(h) @ b.tk_g(g)))))

        phi = b.random_cotangent(rng, point=p)
        lhs_c = b.cot_act(phi, g @ h)
        rhs_c = b.cot_act(b.cot_act(phi, g), h)
        w["w8"] = max(w["w8"], float(np.linalg.norm(lhs_c.coords - rhs_c.coords)))

        # T*kappa_g = (T kappa_g^{-1})* by pairing duality
        v = b.random_tangent(rng)
        pair1 = float(b.cot_act(phi, g).coords @ v)
        pair2 = float(phi.coords @ (np.linalg.inv(b.tk_g(g)) @ v))
        w["duality"] = max(w["duality"], abs(pair1 - pair2))

        # identity element acts trivially
        w["unit"] = max(w["unit"], float(np.max(np.abs(b.tk_g(G.identity()) - np.eye(b.tangent_dim)))))

        # equivariance of the vertical trivialization: Tkappa_g (0, X) = (0, Ad_{g^-1} X)
        x = G.random_algebra(rng)
        lhs_v = b.tk_g(g) @ b.vertical_lift(x)
        rhs_v = b.vertical_lift(G.Ad(gi) @ x)
        w["vert_equivariance"] = max(w["vert_equivariance"], float(np.max(np.abs(lhs_v - rhs_v))))

    for name, resid in sorted(w.items()):
        rep.add(name, resid, tol)
    rep.extras["trials"] = samples
    return rep


def connection_suite(b: BundleSpec, samples: int = 25, seed: int = 0, tol: float = ALGEBRAIC_TOL) -> SuiteReport:
    """ConnectionData invariants: reproducing property and equivariance."""
    rep = SuiteReport(f"bundle.connection[{b.name}]")
    rng = stream(seed, f"bundle.connection/{b.name}")
    G = b.group
    r1 = r2 = 0.0
    for _ in range(samples):
        p = b.random_point(rng)
        x = G.random_algebra(rng)
        r1 = max(r1, float(np.linalg.norm(b.alpha(p, b.vertical_lift(x)) - x)))
        g = G.random_element(rng)
        v = b.random_tangent(rng)
        lhs = b.alpha(b.act(p, g), b.tk_g(g) @ v)
        rhs = G.Ad(np.linalg.inv(g)) @ b.alpha(p, v)
        r2 = max(r2, float(np.linalg.norm(lhs - rhs)))
    rep.add("reproduces_vertical", r1, tol)
    rep.add("Ad_equivariance", r2, tol)
    rep.extras["trials"] = samples
    return rep


def momentum_suite(b: BundleSpec, samples: int = 60, seed: int = 0, tol: float = ALGEBRAIC_TOL) -> SuiteReport:
    """Momentum equivariance, gamma-invariance, and quotient gauge invariance."""
    rep = SuiteReport(f"bundle.momentum[{b.name}]")
    rng = stream(seed, f"bundle.momentum/{b.name}")
    G = b.group
    req = rgam = rquo = ridem = rker = 0.0
    for _ in range(samples):
        phi = b.random_cotangent(rng)
        g = G.random_element(rng)
        req = max(req, b.equivariance_residual(phi, g))

        # gamma-invariance under the lifted action: pair before and after
        v = b.random_tangent(rng)
        before = b.gamma(phi, v)
        after = b.gamma(b.cot_act(phi, g), b.tk_g(g) @ v)
        rgam = max(rgam, abs(before - after))

        # quotient representative: orbit invariance and idempotence
        c1 = b.quotient_rep(phi)
        c2 = b.quotient_rep(b.cot_act(phi, g))
        rquo = max(rquo, b.class_distance(c1, c2))
        ridem = max(ridem, b.class_distance(c1, b.quotient_rep(c1.rep)))

        # phi annihilating the vertical subspace lies in J^{-1}(0)
        phi0 = CotangentSample(phi.point, phi.a, np.zeros(b.n))
        rker = max(rker, float(np.linalg.norm(b.momentum(phi0))))
    rep.add("J_equivariance", req, tol)
    rep.add("gamma_invariance", rgam, tol)
    rep.add("quotient_orbit_invariance", rquo, 1e-11 if b.kind == "TrivialProduct" else tol)
    rep.add("quotient_idempotent", ridem, 1e-11)
    rep.add("vertical_annihilator_in_J0", rker, 1e-13)
    rep.extras["trials"] = samples
    return rep


def dual_sequence_suite(b: BundleSpec, samples: int = 50, seed: int = 0, tol: float = 1e-11) -> SuiteReport:
    """Fiberwise exactness of the dual Atiyah sequence and section identities."""
    rep = SuiteReport(f"bundle.dual_sequence[{b.name}]")
    rng = stream(seed, f"bundle.dual_sequence/{b.name}")
    d, n = b.d, b.n
    r_comp = r_sec = r_flat = r_j0 = 0.0
    rank_ok = True
    for _ in range(samples):
        base = b.random_base(rng)
        # a*: rho -> (rho, 0); iota*: (a, b) -> b.  Ranks by SVD on the matrices.
        a_mat = np.zeros((d + n, d))
        a_mat[:d, :] = np.eye(d)
        i_mat = np.zeros((n, d + n))
        i_mat[:, d:] = np.eye(n)
        rank_a = int(np.linalg.matrix_rank(a_mat, tol=1e-10))
        rank_i = int(np.linalg.matrix_rank(i_mat, tol=1e-10))
        rank_ok = rank_ok and (rank_a + rank_i == d + n)
        r_comp = max(r_comp, float(np.max(np.abs(i_mat @ a_mat))))

        rho = rng.standard_normal(d)
        cls = b.a_star(base, rho)
        r_j0 = max(r_j0, float(np.linalg.norm(b.momentum(cls.rep))))

        chi = b.group.random_coalgebra(rng)
        sec = b.sigma(base, chi)
        base2, chi2 = b.iota_star(sec)
        r_sec = max(r_sec, float(np.linalg.norm(chi2 - chi)) + b.base_distance(base2, base))
        if not any(any(m for m in pb) for pb in b.connection.terms):
            r_flat = max(r_flat, float(np.linalg.norm(sec.rep.a)))
    rep.add("iota_after_a_zero", r_comp, tol)
    rep.add("rank_split", 0.0 if rank_ok else 1.0, 0.5, fiber_dim=d + n)
    rep.add("a_star_lands_in_J0", r_j0, tol)
    rep.add("iota_after_sigma_identity", r_sec, tol)
    if not any(any(m for m in pb) for pb in b.connection.terms):
        rep.add("flat_sigma_zero_base_part", r_flat, tol)
    rep.extras["trials"] = samples
    rep.extras["rank_table"] = {"a_star": d, "iota_star": n, "fiber": d + n}
    return rep


def anchor_pullback_suite(b: BundleSpec, samples: int = 40, seed: int = 0, tol: float = FD_TOL, h: float = FD_STEP) -> SuiteReport:
    """The local dual anchor pulls the canonical form of T*P back to that of T*(P/G).

    Pairings on the T*P side use finite-difference tangents of the curve
    t -> a*_section(rho(t)) so the two sides are computed independently.
    """
    rep = SuiteReport(f"bundle.anchor_pullback[{b.name}]")
    rng = stream(seed, f"bundle.anchor_pullback/{b.name}")
    worst = 0.0
    for _ in range(samples):
        base = b.random_base(rng)
        rho = rng.standard_normal(b.d)
        dbase = rng.standard_normal(b.d)
        drho = rng.standard_normal(b.d)

        def at(t: float):
            return b.base_move(base, dbase, t), rho + t * drho

        # finite-difference tangent of the image curve in T*P coordinates
        bp, rp = at(h)
        bm, rm = at(-h)
        if b.kind == "TrivialProduct":
            fd_base = (bp - bm) / (2 * h)
        else:
            fd_base = b.base_group.log(np.linalg.inv(bm) @ bp) / (2 * h)
        tangent = np.concatenate([fd_base, np.zeros(b.n)])
        phi = b.a_star(base, rho).rep
        lhs = b.gamma(phi, tangent)
        rhs = float(rho @ dbase)  # canonical form of T*(P/G) on (dbase, drho)
        worst = max(worst, abs(lhs - rhs))
    rep.add("pullback_matches_canonical", worst, tol)
    rep.extras["trials"] = samples
    return rep


def full_suite(b: BundleSpec, seed: int = 0, samples: int = 40) -> list[SuiteReport]:
    return [
        action_suite(b, samples=samples, seed=seed),
        connection_suite(b, samples=samples, seed=seed),
        momentum_suite(b, samples=max(60, samples), seed=seed),
        dual_sequence_suite(b, samples=max(50, samples), seed=seed),
        anchor_pullback_suite(b, samples=samples, seed=seed),
    ]


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def bundle_to_json(b: BundleSpec) -> dict:
    from .liealg import spec_to_json

    doc: dict = {"kind": b.kind, "group": spec_to_json(b.group), "connection": b.connection.to_json()}
    if b.kind == "TrivialProduct":
        doc["base_box"] = b.base_box.tolist()
    else:
        doc["base_group"] = spec_to_json(b.base_group)
    return doc


def bundle_from_json(doc: dict, group_resolver: Callable[[Any], LieGroupSpec] | None = None) -> BundleSpec:
    from .liealg import spec_from_json

    resolve = group_resolver or (lambda g: spec_from_json(g))
    group = resolve(doc["group"])
    if doc["kind"] == "TrivialProduct":
        box = np.asarray(doc["base_box"], dtype=float)
        conn = ConnectionData.from_json(doc.get("connection", {}), box.shape[0], group.dim)
        return BundleSpec("TrivialProduct", group, conn, base_box=box)
    base_group = resolve(doc["base_group"])
    conn = ConnectionData.from_json(doc.get("connection", {}), base_group.dim, group.dim)
    return BundleSpec("SemidirectTotal", group, conn, base_group=base_group)
