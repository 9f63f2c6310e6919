"""Poisson brackets, coadjoint orbits, and the symplectic leaves of T*P/G.

Bracket conventions (fixed package-wide, matching the Lie-Poisson structure
{f,g}(mu) = <mu, [grad f, grad g]> on the coalgebra):

  canonical   {f,g} = sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i
  T*P         in trivialized coordinates (base m, fiber u, covector (a, b)):
              {f,g} = dm_f.da_g - dm_g.da_f + du_f.db_g - du_g.db_f
                      + <b, [grad_b g, grad_b f]>
              where du is the left-trivialized fiber derivative.  This is the
              canonical cotangent bracket of T*(M x G); its reduction by the
              right G-action through gauge-fixed representatives reproduces
              the (plus) Lie-Poisson bracket on the coalgebra.
  quotient    functions of the gauge-fixed class coordinates (m, a, bbar),
              bracketed by lifting to G-invariant functions on T*P and
              evaluating the canonical bracket at the gauge slice.

Two-form computations (leaf symplectic forms, magnetic terms, isotropy of
action graphs) use the exterior derivative of the tautological one-form,
d gamma, in the same trivialized coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bundle import BundleSpec, CotangentSample, Point
from .liealg import LieGroupSpec
from .report import SuiteReport
from .rng import stream

Array = np.ndarray

GRAD_STEP = 1e-5
OUTER_STEP = 1e-4
JACOBI_TOL = 1e-6


class ChartError(ValueError):
    """Point outside the coordinate chart of a Poisson space."""


# ---------------------------------------------------------------------------
# scalar fields
# ---------------------------------------------------------------------------


@dataclass
class ScalarField:
    """A smooth function of coordinates, with optional exact gradient.

    ``fd_step`` is the central-difference step used when no exact gradient is
    attached; fields built from already-noisy evaluators (nested brackets)
    should carry a coarser step.
    """

    fn: Callable[[Array], float]
    grad: Callable[[Array], Array] | None = None
    name: str = ""
    fd_step: float = GRAD_STEP

    def __call__(self, x: Array) -> float:
        return float(self.fn(np.asarray(x, dtype=float)))

    def gradient(self, x: Array, h: float | None = None) -> Array:
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        h = self.fd_step if h is None else h
        out = np.empty(x.size)
        for i in range(x.size):
            e = np.zeros(x.size)
            e[i] = h
            out[i] = (self.fn(x + e) - self.fn(x - e)) / (2 * h)
        return out


def coordinate_field(i: int, dim: int) -> ScalarField:
    e = np.zeros(dim)
    e[i] = 1.0
    return ScalarField(lambda x, i=i: float(x[i]), lambda x, e=e: e.copy(), name=f"x{i}")


def random_polynomial(rng: np.random.Generator, dim: int, degree: int = 2, scale: float = 1.0, exact_grad: bool = True) -> ScalarField:
    """Random polynomial with bounded coefficients; exact gradient optional."""
    c0 = float(rng.normal()) * scale
    c1 = rng.normal(size=dim) * scale
    c2 = rng.normal(size=(dim, dim)) * (scale / max(1, dim))
    c2 = 0.5 * (c2 + c2.T) if degree >= 2 else np.zeros((dim, dim))
    c3 = rng.normal(size=dim) * (scale / max(1, dim)) if degree >= 3 else np.zeros(dim)

    def fn(x: Array) -> float:
        return float(c0 + c1 @ x + x @ c2 @ x + c3 @ (x**3))

    def grad(x: Array) -> Array:
        return c1 + 2.0 * (c2 @ x) + 3.0 * c3 * x**2

    return ScalarField(fn, grad if exact_grad else None)


# ---------------------------------------------------------------------------
# the canonical bracket on T*P in trivialized coordinates
# ---------------------------------------------------------------------------


@dataclass
class CotangentFn:
    """Function on T*P with optional exact block gradients (dm, du, da, db)."""

    fn: Callable[[CotangentSample], float]
    grads: Callable[[CotangentSample], tuple[Array, Array, Array, Array]] | None = None


def _shift(bundle: BundleSpec, s: CotangentSample, dm: Array | None = None, du_dir: int | None = None,
           da: Array | None = None, db: Array | None = None, h: float = 0.0) -> CotangentSample:
    base = s.point.base if dm is None else bundle.base_move(s.point.base, dm, h)
    fiber = s.point.fiber
    if du_dir is not None:
        step = np.zeros(bundle.n)
        step[du_dir] = h
        fiber = fiber @ bundle.group.exp(step)
    a = s.a if da is None else s.a + h * da
    b = s.b if db is None else s.b + h * db
    return CotangentSample(Point(base, fiber), a, b)


def cotangent_grads(bundle: BundleSpec, F: CotangentFn, s: CotangentSample, h: float = GRAD_STEP) -> tuple[Array, Array, Array, Array]:
    if F.grads is not None:
        return F.grads(s)
    d, n = bundle.d, bundle.n
    dm = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        dm[i] = (F.fn(_shift(bundle, s, dm=e, h=h)) - F.fn(_shift(bundle, s, dm=e, h=-h))) / (2 * h)
    du = np.empty(n)
    for i in range(n):
        du[i] = (F.fn(_shift(bundle, s, du_dir=i, h=h)) - F.fn(_shift(bundle, s, du_dir=i, h=-h))) / (2 * h)
    da = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        da[i] = (F.fn(_shift(bundle, s, da=e, h=h)) - F.fn(_shift(bundle, s, da=e, h=-h))) / (2 * h)
    db = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        db[i] = (F.fn(_shift(bundle, s, db=e, h=h)) - F.fn(_shift(bundle, s, db=e, h=-h))) / (2 * h)
    return dm, du, da, db


def cotangent_bracket(bundle: BundleSpec, F: CotangentFn, G: CotangentFn, s: CotangentSample, h: float = GRAD_STEP) -> float:
    """Canonical Poisson bracket of T*P in the trivialization-induced frame."""
    dmF, duF, daF, dbF = cotangent_grads(bundle, F, s, h)
    dmG, duG, daG, dbG = cotangent_grads(bundle, G, s, h)
    lie = bundle.group.bracket(dbG, dbF)
    return float(dmF @ daG - dmG @ daF + duF @ dbG - duG @ dbF + s.b @ lie)


# ---------------------------------------------------------------------------
# Poisson spaces
# ---------------------------------------------------------------------------


@dataclass
class PoissonSpace:
    """A bracket-evaluating coordinate description of a Poisson manifold."""

    kind: str  # canonical | lie_poisson | quotient | product
    dim: int
    group: LieGroupSpec | None = None
    bundle: BundleSpec | None = None
    factors: tuple["PoissonSpace", ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("canonical", "lie_poisson", "quotient", "product"):
            raise ValueError(f"unknown Poisson space kind {self.kind!r}")
        if not self.name:
            self.name = self.kind

    # -- chart -----------------------------------------------------------------

    def check_chart(self, x: Array) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            raise ChartError(f"point of shape {x.shape} invalid for {self.name} (dim {self.dim})")
        if self.kind == "quotient":
            d = self.bundle.d
            box = self.bundle.base_box
            if np.any(x[:d] < box[:, 0] - 1e-9) or np.any(x[:d] > box[:, 1] + 1e-9):
                raise ChartError("base point outside the bundle chart")

    # -- bracket ---------------------------------------------------------------

    def bracket(self, f: ScalarField, g: ScalarField, x: Array) -> float:
        self.check_chart(x)
        x = np.asarray(x, dtype=float)
        if self.kind == "canonical":
            nq = self.dim // 2
            gf, gg = f.gradient(x), g.gradient(x)
            return float(gf[:nq] @ gg[nq:] - gf[nq:] @ gg[:nq])
        if self.kind == "lie_poisson":
            gf, gg = f.gradient(x), g.gradient(x)
            return float(x @ self.group.bracket(gf, gg))
        if self.kind == "quotient":
            s = self._gauge_state(x)
            return cotangent_bracket(self.bundle, self._lift(f), self._lift(g), s)
        # product: sum of the factor brackets on coordinate slices
        total = 0.0
        off = 0
        for fac in self.factors:
            sl = slice(off, off + fac.dim)
            f_r = _restrict(f, x, sl)
            g_r = _restrict(g, x, sl)
            total += fac.bracket(f_r, g_r, x[sl])
            off += fac.dim
        return total

    def bivector(self, x: Array) -> Array:
        """Matrix B_ij = {x_i, x_j} at the point."""
        x = np.asarray(x, dtype=float)
        if self.kind == "canonical":
            nq = self.dim // 2
            b = np.zeros((self.dim, self.dim))
            b[:nq, nq:] = np.eye(nq)
            b[nq:, :nq] = -np.eye(nq)
            return b
        if self.kind == "lie_poisson":
            return np.einsum("ijk,k->ij", self.group.structure, x)
        if self.kind == "product":
            blocks = []
            off = 0
            for fac in self.factors:
                blocks.append(fac.bivector(x[off : off + fac.dim]))
                off += fac.dim
            out = np.zeros((self.dim, self.dim))
            off = 0
            for blk in blocks:
                k = blk.shape[0]
                out[off : off + k, off : off + k] = blk
                off += k
            return out
        # quotient: coordinate-function brackets through the invariant lift
        b = np.zeros((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                b[i, j] = self.bracket(coordinate_field(i, self.dim), coordinate_field(j, self.dim), x)
                b[j, i] = -b[i, j]
        return b

    # -- quotient plumbing -------------------------------------------------------

    def _gauge_state(self, x: Array) -> CotangentSample:
        d, n = self.bundle.d, self.bundle.n
        return CotangentSample(Point(x[:d], self.bundle.group.identity()), x[d : 2 * d], x[2 * d :])

    def class_coords(self, s: CotangentSample) -> Array:
        """Coordinates (m, a, bbar) of the class of an arbitrary T*P sample."""
        rep = self.bundle.quotient_rep(s).rep
        return np.concatenate([rep.point.base, rep.a, rep.b])

    def _lift(self, f: ScalarField) -> CotangentFn:
        bundle = self.bundle
        d, n = bundle.d, bundle.n

        def fn(s: CotangentSample) -> float:
            return f(self.class_coords(s))

        if f.grad is None:
            return CotangentFn(fn)

        def grads(s: CotangentSample):
            u_inv = np.linalg.inv(s.point.fiber)
            m_u = bundle.group.Ad_star(u_inv)
            x = np.concatenate([s.point.base, s.a, m_u @ s.b])
            g = f.gradient(x)
            gm, ga, gb = g[:d], g[d : 2 * d], g[2 * d :]
            du = np.empty(n)
            for j in range(n):
                e = np.zeros(n)
                e[j] = 1.0
                du[j] = float(gb @ (-(m_u @ (bundle.group.ad_star(e) @ s.b))))
            return gm, du, ga, m_u.T @ gb

        return CotangentFn(fn, grads)


def _restrict(f: ScalarField, x: Array, sl: slice) -> ScalarField:
    def fn(y: Array) -> float:
        z = x.copy()
        z[sl] = y
        return f(z)

    grad = None
    if f.grad is not None:
        def grad(y: Array) -> Array:
            z = x.copy()
            z[sl] = y
            return f.gradient(z)[sl]

    return ScalarField(fn, grad)


def canonical_cotangent(nq: int, name: str = "") -> PoissonSpace:
    return PoissonSpace("canonical", 2 * nq, name=name or f"T*R{nq}")


def lie_poisson(group: LieGroupSpec, name: str = "") -> PoissonSpace:
    return PoissonSpace("lie_poisson", group.dim, group=group, name=name or f"{group.name}*")


def quotient_cotangent(bundle: BundleSpec, name: str = "") -> PoissonSpace:
    if bundle.kind != "TrivialProduct":
        raise ValueError("quotient coordinates require a TrivialProduct bundle chart")
    return PoissonSpace("quotient", 2 * bundle.d + bundle.n, bundle=bundle, name=name or f"T*P/G[{bundle.name}]")


def product_space(factors: Sequence[PoissonSpace], name: str = "") -> PoissonSpace:
    facs = tuple(factors)
    return PoissonSpace("product", sum(f.dim for f in facs), factors=facs, name=name or "x".join(f.name for f in facs))


# ---------------------------------------------------------------------------
# verification: antisymmetry/Leibniz, Jacobi, dual pair
# ---------------------------------------------------------------------------


def bracket_property_suite(space: PoissonSpace, trials: int = 200, seed: int = 0, point_sampler=None) -> SuiteReport:
    """Antisymmetry and the Leibniz rule on seeded random function triples."""
    rep = SuiteReport(f"poisson.bracket_properties[{space.name}]")
    rng = stream(seed, f"poisson.properties/{space.name}")
    w_anti = w_leib = 0.0
    for _ in range(trials):
        x = _sample_point(space, rng) if point_sampler is None else point_sampler(rng)
        f = random_polynomial(rng, space.dim)
        g = random_polynomial(rng, space.dim)
        k = random_polynomial(rng, space.dim)
        w_anti = max(w_anti, abs(space.bracket(f, g, x) + space.bracket(g, f, x)))
        prod = ScalarField(lambda y: f(y) * g(y), lambda y: f.gradient(y) * g(y) + f(y) * g.gradient(y))
        lhs = space.bracket(prod, k, x)
        rhs = f(x) * space.bracket(g, k, x) + g(x) * space.bracket(f, k, x)
        w_leib = max(w_leib, abs(lhs - rhs))
    rep.add("antisymmetry", w_anti, 1e-12 if space.kind in ("canonical", "lie_poisson") else 1e-9)
    rep.add("leibniz", w_leib, 1e-8)
    rep.extras["trials"] = trials
    return rep


def _sample_point(space: PoissonSpace, rng: np.random.Generator) -> Array:
    if space.kind == "quotient":
        b = space.bundle
        m = b.random_base(rng)
        return np.concatenate([m, rng.standard_normal(b.d), rng.standard_normal(b.n)])
    if space.kind == "product":
        return np.concatenate([_sample_point(f, rng) for f in space.factors])
    return rng.standard_normal(space.dim)


def jacobi_check(space: PoissonSpace, point: Array | None = None, trials: int = 20, seed: int = 0,
                 degree: int = 2, exact_grad: bool = True, outer_h: float = OUTER_STEP) -> float:
    """Max cyclic-sum residual over random polynomial triples.

    The nested brackets are differentiated by central differences at the
    coarser second-level step, so the result is finite-difference dominated
    regardless of whether the generated polynomials carry exact gradients.
    """
    rng = stream(seed, f"poisson.jacobi/{space.name}")
    worst = 0.0
    for _ in range(trials):
        x = _sample_point(space, rng) if point is None else np.asarray(point, dtype=float)
        f = random_polynomial(rng, space.dim, degree=degree, exact_grad=exact_grad)
        g = random_polynomial(rng, space.dim, degree=degree, exact_grad=exact_grad)
        k = random_polynomial(rng, space.dim, degree=degree, exact_grad=exact_grad)

        def nest(a: ScalarField, bb: ScalarField) -> ScalarField:
            return ScalarField(lambda y: space.bracket(a, bb, y), fd_step=outer_h)

        total = (
            space.bracket(f, nest(g, k), x)
            + space.bracket(g, nest(k, f), x)
            + space.bracket(k, nest(f, g), x)
        )
        worst = max(worst, abs(total))
    return worst


def dual_pair_check(bundle: BundleSpec, trials: int = 100, seed: int = 0, tol: float = 1e-7) -> SuiteReport:
    """Polarity of the dual pair: {f o pi_G, h o J} = 0 on T*P."""
    rep = SuiteReport(f"poisson.dual_pair[{bundle.name}]")
    rng = stream(seed, f"poisson.dual_pair/{bundle.name}")
    quot = quotient_cotangent(bundle)
    worst = w_cas = 0.0
    for _ in range(trials):
        s = bundle.random_cotangent(rng)
        f = random_polynomial(rng, quot.dim)
        h = random_polynomial(rng, bundle.n)
        F = quot._lift(f)
        H = CotangentFn(lambda ss, h=h: h(ss.b), lambda ss, h=h: (np.zeros(bundle.d), np.zeros(bundle.n), np.zeros(bundle.d), h.gradient(ss.b)))
        worst = max(worst, abs(cotangent_bracket(bundle, F, H, s)))

        # a Casimir of the coalgebra Poisson-commutes with other J-pullbacks too
        cas = _casimir_fields(bundle.group)
        if cas:
            c = cas[0]
            C = CotangentFn(lambda ss, c=c: c(ss.b), lambda ss, c=c: (np.zeros(bundle.d), np.zeros(bundle.n), np.zeros(bundle.d), c.gradient(ss.b)))
            h2 = random_polynomial(rng, bundle.n)
            H2 = CotangentFn(lambda ss, h2=h2: h2(ss.b), lambda ss, h2=h2: (np.zeros(bundle.d), np.zeros(bundle.n), np.zeros(bundle.d), h2.gradient(ss.b)))
            w_cas = max(w_cas, abs(cotangent_bracket(bundle, C, H2, s)))
            w_cas = max(w_cas, abs(cotangent_bracket(bundle, F, C, s)))
    rep.add("polarity", worst, tol)
    if _casimir_fields(bundle.group):
        rep.add("casimir_commutes", w_cas, tol)
    rep.extras["trials"] = trials
    return rep


# ---------------------------------------------------------------------------
# coadjoint orbits
# ---------------------------------------------------------------------------


def _casimir_fields(group: LieGroupSpec) -> list[ScalarField]:
    n = group.dim
    if group.name == "so3":
        return [ScalarField(lambda mu: float(mu @ mu), lambda mu: 2.0 * mu, name="|mu|^2")]
    if group.name == "heisenberg3":
        return [coordinate_field(2, n)]
    if np.allclose(group.structure, 0.0):
        return [coordinate_field(i, n) for i in range(n)]
    if group.name.startswith("sd:"):
        # semidirect K x| R^k built by the semidirect module: Casimirs of the
        # classic form |Gamma|^2 and <Pi, Gamma> when K = so3, N = r3
        if group.name == "sd:so3|r3":
            def c1(mu):
                return float(mu[3:] @ mu[3:])

            def g1(mu):
                out = np.zeros(6)
                out[3:] = 2.0 * mu[3:]
                return out

            def c2(mu):
                return float(mu[:3] @ mu[3:])

            def g2(mu):
                return np.concatenate([mu[3:], mu[:3]])

            return [ScalarField(c1, g1, name="|Gamma|^2"), ScalarField(c2, g2, name="<Pi,Gamma>")]
    return []


@dataclass
class CoadjointOrbit:
    """Orbit of the coadjoint action through mu0, with sampled points."""

    group: LieGroupSpec
    mu0: Array
    samples: list[Array] = field(default_factory=list)
    dim: int = 0

    def tangent_span(self, mu: Array) -> Array:
        """Columns ad*_{e_i} mu spanning the orbit tangent space at mu."""
        n = self.group.dim
        return np.stack([self.group.ad_star(np.eye(n)[i]) @ mu for i in range(n)], axis=1)

    def membership_residual(self, mu: Array) -> float:
        cas = _casimir_fields(self.group)
        if cas:
            return max(abs(c(mu) - c(self.mu0)) for c in cas)
        if not self.samples:
            return float(np.linalg.norm(mu - self.mu0))
        return min(float(np.linalg.norm(mu - s)) for s in self.samples + [self.mu0])


def coadjoint_orbit(group: LieGroupSpec, mu0: Array, n_samples: int = 40, seed: int = 0) -> CoadjointOrbit:
    mu0 = np.asarray(mu0, dtype=float)
    rng = stream(seed, f"poisson.orbit/{group.name}")
    orbit = CoadjointOrbit(group, mu0)
    for _ in range(n_samples):
        g = group.random_element(rng, scale=0.8)
        orbit.samples.append(group.Ad_star(np.linalg.inv(g)) @ mu0)
    span = orbit.tangent_span(mu0)
    svals = np.linalg.svd(span, compute_uv=False)
    cut = 1e-8 * max(svals[0], 1.0)
    orbit.dim = int(np.sum(svals > cut))
    return orbit


def coadjoint_transport(group: LieGroupSpec, mu_from: Array, mu_to: Array) -> Array:
    """A group element w with Ad*_{w^-1} mu_from = mu_to (orbit alignment)."""
    mu_from = np.asarray(mu_from, dtype=float)
    mu_to = np.asarray(mu_to, dtype=float)
    if np.allclose(group.structure, 0.0):
        if np.linalg.norm(mu_from - mu_to) > 1e-9:
            raise ValueError("points on distinct orbits of an abelian group")
        return group.identity()
    if group.name == "so3":
        # Ad*_{w^-1} mu = w mu in the vector representation: rotate mu_from onto mu_to
        a, b = mu_from, mu_to
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if abs(na - nb) > 1e-8 * max(1.0, na):
            raise ValueError("points on distinct so3* orbits")
        if na < 1e-14:
            return group.identity()
        axis = np.cross(a, b)
        s = np.linalg.norm(axis) / (na * nb)
        c = float(a @ b) / (na * nb)
        if s < 1e-12:
            if c > 0:
                return group.identity()
            # antipodal: rotate by pi around any axis orthogonal to a
            perp = np.eye(3)[int(np.argmin(np.abs(a)))]
            perp = perp - (perp @ a) / (na * na) * a
            perp = perp / np.linalg.norm(perp)
            return group.exp(np.pi * perp * (1 - 1e-12))
        angle = float(np.arctan2(s, c))
        return group.exp(angle * axis / np.linalg.norm(axis))
    raise NotImplementedError(f"no coadjoint transport rule for group {group.name!r}")


# ---------------------------------------------------------------------------
# symplectic two-forms in trivialized coordinates
# ---------------------------------------------------------------------------


def dgamma(bundle: BundleSpec, s: CotangentSample, v1: Array, v2: Array) -> float:
    """d gamma of T*P on trivialized tangents (dm, xi, da, db)."""
    d, n = bundle.d, bundle.n
    dm1, xi1, da1, db1 = v1[:d], v1[d : d + n], v1[d + n : 2 * d + n], v1[2 * d + n :]
    dm2, xi2, da2, db2 = v2[:d], v2[d : d + n], v2[d + n : 2 * d + n], v2[2 * d + n :]
    return float(da1 @ dm2 - da2 @ dm1 + db1 @ xi2 - db2 @ xi1 - s.b @ bundle.group.bracket(xi1, xi2))


def dexp_left(group: LieGroupSpec, xi: Array, dxi: Array, terms: int = 24) -> Array:
    """Left-trivialized velocity of t -> exp(xi + t dxi) at t = 0.

    The standard series sum_k (-ad_xi)^k / (k+1)! applied to dxi.
    """
    acc = np.asarray(dxi, dtype=float).copy()
    out = acc.copy()
    neg_ad = -group.ad(xi)
    fact = 1.0
    for k in range(1, terms):
        acc = neg_ad @ acc
        fact *= k + 1
        out = out + acc / fact
    return out


def dgamma_fd(bundle: BundleSpec, s: CotangentSample, v1: Array, v2: Array, h: float = GRAD_STEP) -> float:
    """d gamma by finite differences of one-form pairings in the exp chart.

    The chart is centered at the sample's fiber element, u = u0 exp(xi), so
    chart directions at the center coincide with left-trivialized tangents.
    Coordinate extensions of chart directions commute, hence
    d gamma(V1, V2) = V1(gamma(V2)) - V2(gamma(V1)).
    """
    d, n = bundle.d, bundle.n

    def gamma_at(z: Array, v: Array) -> float:
        a, b = z[d + n : 2 * d + n], z[2 * d + n :]
        zeta = dexp_left(bundle.group, z[d : d + n], v[d : d + n])
        return float(a @ v[:d] + b @ zeta)

    z0 = np.concatenate([np.asarray(s.point.base, dtype=float), np.zeros(n), s.a, s.b])
    t1 = (gamma_at(z0 + h * v1, v2) - gamma_at(z0 - h * v1, v2)) / (2 * h)
    t2 = (gamma_at(z0 + h * v2, v1) - gamma_at(z0 - h * v2, v1)) / (2 * h)
    return float(t1 - t2)


# ---------------------------------------------------------------------------
# symplectic leaves of T*P/G
# ---------------------------------------------------------------------------


def leaf_structure(bundle: BundleSpec, orbit: CoadjointOrbit, samples: int = 25, seed: int = 0,
                   tol_affine: float = 1e-10, membership_tol: float = 1e-8) -> SuiteReport:
    """Membership, dimension, affine fibration, and section checks for J^{-1}(O)/G."""
    rep = SuiteReport(f"poisson.leaf[{bundle.name}|orbit({orbit.group.name})]")
    rng = stream(seed, f"poisson.leaf/{bundle.name}")
    quot = quotient_cotangent(bundle)
    d, n = bundle.d, bundle.n
    G = bundle.group

    w_member = w_aff = w_pis = w_surj = 0.0
    dim_ok = True
    leaf_dims = set()
    for _ in range(samples):
        # on-orbit sample upstairs, arbitrary gauge
        g = G.random_element(rng, scale=0.8)
        chi = G.Ad_star(np.linalg.inv(g)) @ orbit.mu0
        phi = bundle.random_cotangent(rng)
        phi = CotangentSample(phi.point, phi.a, G.Ad_star(phi.point.fiber) @ chi)

        # (a) membership equivalence: J-side vs iota*-side verdicts
        j_val = bundle.momentum(phi)
        j_member = orbit.membership_residual(j_val) <= membership_tol
        base_r, chi_r = bundle.iota_star(bundle.quotient_rep(phi))
        i_member = orbit.membership_residual(chi_r) <= membership_tol
        w_member = max(w_member, 0.0 if (j_member and i_member) else 1.0)

        off = bundle.random_cotangent(rng)  # generic covector: off the orbit unless G is abelian
        if orbit.membership_residual(bundle.momentum(off)) > 10 * membership_tol:
            j_off = orbit.membership_residual(bundle.momentum(off)) <= membership_tol
            i_off = orbit.membership_residual(bundle.iota_star(bundle.quotient_rep(off))[1]) <= membership_tol
            w_member = max(w_member, 0.0 if (j_off == i_off) else 1.0)

        # (b) leaf dimension: rank of the tangent span of the parametrization
        # (m, rho, orbit direction) -> a*(rho) + sigma(m, transported chi)
        x0 = quot.class_coords(phi)
        m0, chi0 = x0[:d], x0[2 * d :]

        def embed(mm: Array, rho: Array, svec: Array) -> Array:
            chi_s = G.Ad_star(G.exp(-svec)) @ chi0
            cls = bundle.sigma(mm, chi_s)
            return np.concatenate([mm, cls.rep.a + rho, chi_s])

        hstep = 1e-6
        cols = []
        for i in range(d):
            e = np.zeros(d); e[i] = hstep
            cols.append((embed(m0 + e, np.zeros(d), np.zeros(n)) - embed(m0 - e, np.zeros(d), np.zeros(n))) / (2 * hstep))
        for i in range(d):
            e = np.zeros(d); e[i] = hstep
            cols.append((embed(m0, e, np.zeros(n)) - embed(m0, -e, np.zeros(n))) / (2 * hstep))
        for i in range(n):
            e = np.zeros(n); e[i] = hstep
            cols.append((embed(m0, np.zeros(d), e) - embed(m0, np.zeros(d), -e)) / (2 * hstep))
        span = np.stack(cols, axis=1)
        svals = np.linalg.svd(span, compute_uv=False)
        leaf_dim = int(np.sum(svals > 1e-6 * max(svals[0], 1.0)))
        leaf_dims.add(leaf_dim)
        dim_ok = dim_ok and (leaf_dim == 2 * d + orbit.dim)

        # (c) the affine action is free and transitive on iota*-fibers
        cls1 = quot.class_coords(phi)
        rho2 = rng.standard_normal(d)
        cls2 = np.concatenate([cls1[:d], cls1[d : 2 * d] + rho2, cls1[2 * d :]])
        diff_rho = cls2[d : 2 * d] - cls1[d : 2 * d]
        recon = bundle.a_star(cls1[:d], diff_rho)
        moved = np.concatenate([cls1[:d], cls1[d : 2 * d] + recon.rep.a, cls1[2 * d :] + recon.rep.b])
        w_aff = max(w_aff, float(np.linalg.norm(moved - cls2)))

        # (d) pi_sigma: gauge-choice independence and constructive surjectivity
        cls_a = quot.class_coords(phi)
        cls_b = quot.class_coords(bundle.cot_act(phi, G.random_element(rng)))
        pis_a = cls_a[d : 2 * d] - bundle.sigma(cls_a[:d], cls_a[2 * d :]).rep.a
        pis_b = cls_b[d : 2 * d] - bundle.sigma(cls_b[:d], cls_b[2 * d :]).rep.a
        w_pis = max(w_pis, float(np.linalg.norm(pis_a - pis_b)))
        # preimage of a random rho: sigma(m, chi) + a*(rho) maps back to rho
        rho_target = rng.standard_normal(d)
        sec = bundle.sigma(m0, chi0)
        from .bundle import QuotientClass

        preimage = QuotientClass(CotangentSample(sec.rep.point, sec.rep.a + rho_target, sec.rep.b))
        w_surj = max(w_surj, float(np.linalg.norm(bundle.sigma_tilde(preimage) - rho_target)))

    rep.add("membership_equivalence", w_member, 0.5)
    rep.add("leaf_dimension", 0.0 if dim_ok else 1.0, 0.5, expected=2 * d + orbit.dim, got=sorted(leaf_dims))
    rep.add("affine_transitivity", w_aff, tol_affine)
    rep.add("pi_sigma_well_defined", w_pis, 1e-9)
    rep.add("pi_sigma_surjective", w_surj, 1e-11)
    rep.extras["orbit_dim"] = orbit.dim
    rep.extras["leaf_dim"] = 2 * d + orbit.dim
    rep.extras["membership_trials"] = samples
    rep.extras["affine_transitivity_residual"] = w_aff
    return rep


def magnetic_term(bundle: BundleSpec, chi: Array, samples: int = 15, seed: int = 0,
                  inner_h: float = GRAD_STEP, outer_h: float = 1e-3):
    """Two-form evaluator for omega_chi - pi_sigma* d(gamma~) plus its report.

    Requires a one-point coadjoint orbit (chi fixed by Ad*).  The leaf form
    omega_chi is the reduction of d gamma to J^{-1}(chi)/G computed by finite
    differences at the gauge slice; pi_sigma maps the leaf to T*(P/G) through
    the connection-induced section.
    """
    chi = np.asarray(chi, dtype=float)
    G = bundle.group
    span = np.stack([G.ad_star(np.eye(G.dim)[i]) @ chi for i in range(G.dim)], axis=1)
    if float(np.max(np.abs(span))) > 1e-10:
        raise ValueError("magnetic term needs a one-point orbit (chi must be a character)")
    d, n = bundle.d, bundle.n

    def leaf_state(m: Array, rho: Array) -> CotangentSample:
        # inverse of pi_sigma: a = rho + sigma-part
        cls = bundle.sigma(m, chi)
        return CotangentSample(Point(m, G.identity()), rho + cls.rep.a, chi.copy())

    def two_form(m: Array, rho: Array, t1: Array, t2: Array) -> float:
        """Evaluate on tangents (dm, drho) of T*(P/G) at (m, rho)."""
        def push(t: Array) -> Array:
            # pushforward through the leaf embedding, by central differences
            sp = leaf_state(m + inner_h * t[:d], rho + inner_h * t[d:])
            sm = leaf_state(m - inner_h * t[:d], rho - inner_h * t[d:])
            dm = (np.asarray(sp.point.base) - np.asarray(sm.point.base)) / (2 * inner_h)
            da = (sp.a - sm.a) / (2 * inner_h)
            return np.concatenate([dm, np.zeros(n), da, np.zeros(n)])

        s0 = leaf_state(m, rho)
        wchi = dgamma_fd(bundle, s0, push(t1), push(t2), h=inner_h)
        # canonical d(gamma~) of T*(P/G) on the flat chart
        can = float(t1[d:] @ t2[:d] - t2[d:] @ t1[:d])
        return wchi - can

    rep = SuiteReport(f"poisson.magnetic[{bundle.name}]")
    rng = stream(seed, f"poisson.magnetic/{bundle.name}")
    w_match = w_closed = w_basic = 0.0
    flat = not any(any(monos for monos in per_base) for per_base in bundle.connection.terms)
    for _ in range(samples):
        m = bundle.random_base(rng)
        rho = rng.standard_normal(d)
        t1, t2 = rng.standard_normal(2 * d), rng.standard_normal(2 * d)
        val = two_form(m, rho, t1, t2)
        # oracle: the chi-component of the curvature two-form of A
        f2 = bundle.connection.curvature_two_form(bundle.base_coords_for_connection(m))
        oracle = float(t1[:d] @ np.einsum("ijk,k->ij", f2, chi) @ t2[:d])
        w_match = max(w_match, abs(val - oracle))

        # basic: vanishes when either argument is a pure fiber direction
        fib = np.concatenate([np.zeros(d), rng.standard_normal(d)])
        w_basic = max(w_basic, abs(two_form(m, rho, fib, t2)))

        # closedness: finite-difference exterior derivative on coordinate triples
        # (coordinate directions commute, so the cyclic-derivative formula applies)
        if d >= 2:
            idx = rng.choice(d, size=min(3, d), replace=False)
            e = [np.concatenate([np.eye(d)[i], np.zeros(d)]) for i in idx]
            while len(e) < 3:
                e.append(np.concatenate([np.zeros(d), np.eye(d)[rng.integers(d)]]))

            def omega_ij(mm: Array, rr: Array, i: int, j: int) -> float:
                return two_form(mm, rr, e[i], e[j])

            dval = 0.0
            for a_, b_, c_ in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
                sm, sr = outer_h * e[a_][:d], outer_h * e[a_][d:]
                dval += (omega_ij(m + sm, rho + sr, b_, c_) - omega_ij(m - sm, rho - sr, b_, c_)) / (2 * outer_h)
            w_closed = max(w_closed, abs(dval))
    if flat or float(np.linalg.norm(chi)) == 0.0:
        rep.add("flat_or_zero_chi_vanishes", w_match, 1e-9)
    rep.add("matches_curvature_oracle", w_match, 1e-7)
    rep.add("closed", w_closed, 1e-6)
    rep.add("basic_on_fiber_directions", w_basic, 1e-9)
    rep.extras["trials"] = samples
    rep.extras["magnetic_closedness_residual"] = w_closed
    return two_form, rep


# ---------------------------------------------------------------------------
# the symplectic groupoid T*((PxP)/G) => T*P/G acting on leaves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairClassPoint:
    """Gauge-fixed point of (T*P x T*P)/G: legs ((m1, w), (m2, e)) with covectors."""

    m1: Array
    w: Array
    m2: Array
    a1: Array
    b1: Array
    a2: Array
    b2: Array


def _pair_omega(bundle: BundleSpec, z: PairClassPoint, v1: Array, v2: Array) -> float:
    """Ambient symplectic form d(gamma + gamma) on gauge-slice tangents.

    Tangent layout: (dm1, eta, dm2, da1, db1, da2, db2); the second leg stays
    on the fiber-identity slice so its group direction vanishes.
    """
    d, n = bundle.d, bundle.n

    def split(v: Array):
        o = 0
        dm1 = v[o : o + d]; o += d
        eta = v[o : o + n]; o += n
        dm2 = v[o : o + d]; o += d
        da1 = v[o : o + d]; o += d
        db1 = v[o : o + n]; o += n
        da2 = v[o : o + d]; o += d
        db2 = v[o : o + n]
        return dm1, eta, dm2, da1, db1, da2, db2

    m11, e1, m21, a11, b11, a21, b21 = split(v1)
    m12, e2, m22, a12, b12, a22, b22 = split(v2)
    leg1 = float(a11 @ m12 - a12 @ m11 + b11 @ e2 - b12 @ e1 - z.b1 @ bundle.group.bracket(e1, e2))
    leg2 = float(a21 @ m22 - a22 @ m21)
    return leg1 + leg2


def _pair_t(bundle: BundleSpec, z: PairClassPoint) -> Array:
    """Target map to T*P/G coordinates: class of the first leg."""
    m_w = bundle.group.Ad_star(np.linalg.inv(z.w))
    return np.concatenate([z.m1, z.a1, m_w @ z.b1])


def _pair_s(bundle: BundleSpec, z: PairClassPoint) -> Array:
    """Source map to T*P/G coordinates: class of minus the second leg."""
    return np.concatenate([z.m2, -z.a2, -z.b2])


def _pair_product(bundle: BundleSpec, lam: PairClassPoint, y: PairClassPoint) -> PairClassPoint:
    """Groupoid product in (T*P x T*P)/G of gauge-fixed representatives."""
    return PairClassPoint(lam.m1, lam.w @ y.w, y.m2, lam.a1, y.b1, y.a2, y.b2)


def _gauge_arrow_bracket(bundle: BundleSpec, F, G_, z: PairClassPoint, h: float = GRAD_STEP) -> float:
    """Canonical bracket of T*((PxP)/G) = T*(M x G x M) in gauge coordinates."""
    d, n = bundle.d, bundle.n

    def move(z: PairClassPoint, slot: str, i: int, t: float) -> PairClassPoint:
        vals = {k: getattr(z, k) for k in ("m1", "w", "m2", "a1", "b1", "a2", "b2")}
        if slot == "w":
            e = np.zeros(n); e[i] = t
            vals["w"] = z.w @ bundle.group.exp(e)
        else:
            arr = vals[slot].copy()
            arr[i] += t
            vals[slot] = arr
        return PairClassPoint(**vals)

    def grads(F):
        out = {}
        for slot, k in (("m1", d), ("w", n), ("m2", d), ("a1", d), ("b1", n), ("a2", d), ("b2", n)):
            g = np.empty(k)
            for i in range(k):
                g[i] = (F(move(z, slot, i, h)) - F(move(z, slot, i, -h))) / (2 * h)
            out[slot] = g
        return out

    gf, gg = grads(F), grads(G_)
    # beta = b1 with b2 = -b1 on T*Gamma; treat (w, beta) as the group block
    lie = bundle.group.bracket(gg["b1"] - gg["b2"], gf["b1"] - gf["b2"])
    beta = z.b1
    val = (
        gf["m1"] @ gg["a1"] - gg["m1"] @ gf["a1"]
        + gf["m2"] @ gg["a2"] - gg["m2"] @ gf["a2"]
        + gf["w"] @ (gg["b1"] - gg["b2"]) - gg["w"] @ (gf["b1"] - gf["b2"])
        + beta @ lie
    )
    return float(val)


def groupoid_action_suite(bundle: BundleSpec, orbit: CoadjointOrbit, samples: int = 12, seed: int = 0) -> SuiteReport:
    """Target/source Poisson properties, orbit connectivity, and graph isotropy."""
    rep = SuiteReport(f"poisson.groupoid_action[{bundle.name}]")
    rng = stream(seed, f"poisson.groupoid_action/{bundle.name}")
    quot = quotient_cotangent(bundle)
    G = bundle.group
    d, n = bundle.d, bundle.n

    w_t = w_s = w_conn = w_iso = 0.0
    for _ in range(samples):
        # random arrow of T*Gamma: b2 = -b1
        beta = rng.standard_normal(n)
        lam = PairClassPoint(bundle.random_base(rng), G.random_element(rng), bundle.random_base(rng),
                             rng.standard_normal(d), beta, rng.standard_normal(d), -beta)

        f = random_polynomial(rng, quot.dim)
        g = random_polynomial(rng, quot.dim)
        Ft = lambda z, f=f: f(_pair_t(bundle, z))
        Gt = lambda z, g=g: g(_pair_t(bundle, z))
        lhs = _gauge_arrow_bracket(bundle, Ft, Gt, lam)
        rhs = quot.bracket(f, g, _pair_t(bundle, lam))
        w_t = max(w_t, abs(lhs - rhs))

        Fs = lambda z, f=f: f(_pair_s(bundle, z))
        Gs = lambda z, g=g: g(_pair_s(bundle, z))
        lhs = _gauge_arrow_bracket(bundle, Fs, Gs, lam)
        rhs = quot.bracket(f, g, _pair_s(bundle, lam))
        w_s = max(w_s, abs(lhs + rhs))

        # orbit connectivity: any two leaf points of J^{-1}(O)/G are joined by an arrow
        g1, g2 = G.random_element(rng, 0.8), G.random_element(rng, 0.8)
        b_from = G.Ad_star(np.linalg.inv(g1)) @ orbit.mu0
        b_to = G.Ad_star(np.linalg.inv(g2)) @ orbit.mu0
        z_from = np.concatenate([bundle.random_base(rng), rng.standard_normal(d), b_from])
        z_to = np.concatenate([bundle.random_base(rng), rng.standard_normal(d), b_to])
        try:
            w_el = coadjoint_transport(G, z_from[2 * d :], z_to[2 * d :])
        except NotImplementedError:
            w_el = None
        if w_el is not None:
            arrow = PairClassPoint(z_to[:d], w_el, z_from[:d], z_to[d : 2 * d],
                                   G.Ad_star(w_el) @ z_to[2 * d :], -z_from[d : 2 * d], -z_from[2 * d :])
            res = float(np.linalg.norm(_pair_s(bundle, arrow) - z_from)) + float(np.linalg.norm(_pair_t(bundle, arrow) - z_to))
            w_conn = max(w_conn, res)

        # graph isotropy of the action map (Lagrangian by dimension count)
        w_iso = max(w_iso, _graph_isotropy_sample(bundle, orbit, rng))

    rep.add("target_poisson", w_t, 1e-6)
    rep.add("source_anti_poisson", w_s, 1e-6)
    rep.add("orbit_connectivity", w_conn, 1e-9)
    rep.add("graph_isotropy", w_iso, 1e-7)
    rep.extras["trials"] = samples
    return rep


def _graph_isotropy_sample(bundle: BundleSpec, orbit: CoadjointOrbit, rng: np.random.Generator, fd_h: float = 1e-6) -> float:
    """Isotropy of the action-graph tangent space for omega_Gamma + omega_L - omega_L."""
    G = bundle.group
    d, n = bundle.d, bundle.n

    # composable pair: y in the leaf, lam with s(lam) = t(y)
    g1, g2 = G.random_element(rng, 0.8), G.random_element(rng, 0.8)
    bsum = G.Ad_star(np.linalg.inv(g1)) @ orbit.mu0
    b1 = rng.standard_normal(n)
    y = PairClassPoint(bundle.random_base(rng), G.random_element(rng), bundle.random_base(rng),
                       rng.standard_normal(d), b1, rng.standard_normal(d), bsum - b1)

    def lam_for(y: PairClassPoint, m1, w, a1) -> PairClassPoint:
        beta = G.Ad_star(np.linalg.inv(y.w)) @ y.b1
        return PairClassPoint(m1, w, y.m1, a1, beta, -y.a1, -beta)

    m1_0, w_0, a1_0 = bundle.random_base(rng), G.random_element(rng), rng.standard_normal(d)

    # leaf tangent directions at y: free slots, b-preserving pairs, orbit moves
    directions = []
    for slot, k in (("m1", d), ("w", n), ("m2", d), ("a1", d), ("a2", d)):
        for i in range(k):
            directions.append((slot, i, None))
    for i in range(n):
        directions.append(("bpair", i, None))
    span = orbit.tangent_span(bsum)
    for i in range(n):
        v = span[:, i]
        if np.linalg.norm(v) > 1e-10:
            directions.append(("borbit", i, v))

    def move_y(y: PairClassPoint, direction, t: float) -> PairClassPoint:
        slot, i, payload = direction
        vals = {k: getattr(y, k) for k in ("m1", "w", "m2", "a1", "b1", "a2", "b2")}
        if slot == "w":
            e = np.zeros(n); e[i] = t
            vals["w"] = y.w @ G.exp(e)
        elif slot == "bpair":
            e = np.zeros(n); e[i] = t
            vals["b1"] = y.b1 + e
            vals["b2"] = y.b2 - e
        elif slot == "borbit":
            vals["b2"] = y.b2 + t * payload
        else:
            arr = vals[slot].copy()
            arr[i] += t
            vals[slot] = arr
        return PairClassPoint(**vals)

    def coords_tangent(zp: PairClassPoint, zm: PairClassPoint, h: float) -> Array:
        dw = G.log(np.linalg.inv(zm.w) @ zp.w) / (2 * h)
        if bundle.kind == "TrivialProduct":
            dm1 = (zp.m1 - zm.m1) / (2 * h)
            dm2 = (zp.m2 - zm.m2) / (2 * h)
        else:
            dm1 = bundle.base_group.log(np.linalg.inv(zm.m1) @ zp.m1) / (2 * h)
            dm2 = bundle.base_group.log(np.linalg.inv(zm.m2) @ zp.m2) / (2 * h)
        return np.concatenate([dm1, dw, dm2, (zp.a1 - zm.a1) / (2 * h), (zp.b1 - zm.b1) / (2 * h),
                               (zp.a2 - zm.a2) / (2 * h), (zp.b2 - zm.b2) / (2 * h)])

    # graph tangents: free lam-part (dm1, eta, da1) with y frozen, plus leaf moves
    tangents = []
    lam0 = lam_for(y, m1_0, w_0, a1_0)
    z0 = _pair_product(bundle, lam0, y)
    for slot, k in (("m1", d), ("w", n), ("a1", d)):
        for i in range(k):
            def lam_t(t, slot=slot, i=i):
                if slot == "w":
                    e = np.zeros(n); e[i] = t
                    return lam_for(y, m1_0, w_0 @ G.exp(e), a1_0)
                if slot == "m1":
                    e = np.zeros(d); e[i] = t
                    return lam_for(y, bundle.base_move(m1_0, e, 1.0) if bundle.kind != "TrivialProduct" else m1_0 + e, w_0, a1_0)
                e = np.zeros(d); e[i] = t
                return lam_for(y, m1_0, w_0, a1_0 + e)

            lp, lm = lam_t(fd_h), lam_t(-fd_h)
            dlam = coords_tangent(lp, lm, fd_h)
            zp, zm = _pair_product(bundle, lp, y), _pair_product(bundle, lm, y)
            dz = coords_tangent(zp, zm, fd_h)
            tangents.append((dlam, np.zeros(4 * d + 3 * n), dz))
    for direction in directions:
        yp, ym = move_y(y, direction, fd_h), move_y(y, direction, -fd_h)
        dy = coords_tangent(yp, ym, fd_h)
        lp, lm = lam_for(yp, m1_0, w_0, a1_0), lam_for(ym, m1_0, w_0, a1_0)
        dlam = coords_tangent(lp, lm, fd_h)
        zp, zm = _pair_product(bundle, lp, yp), _pair_product(bundle, lm, ym)
        dz = coords_tangent(zp, zm, fd_h)
        tangents.append((dlam, dy, dz))

    worst = 0.0
    count = len(tangents)
    pair_idx = [(i, j) for i in range(count) for j in range(i + 1, count)]
    if len(pair_idx) > 60:
        picks = rng.choice(len(pair_idx), size=60, replace=False)
        pair_idx = [pair_idx[int(k)] for k in picks]
    for i, j in pair_idx:
        t1, t2 = tangents[i], tangents[j]
        val = (
            _pair_omega(bundle, lam0, t1[0], t2[0])
            + _pair_omega(bundle, y, t1[1], t2[1])
            - _pair_omega(bundle, z0, t1[2], t2[2])
        )
        worst = max(worst, abs(val))
    return worst
