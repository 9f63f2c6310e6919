"""Hamiltonian vector fields from Poisson brackets, RK4 integration, drift monitors."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .liealg import LieGroupSpec, expm
from .poisson import PoissonSpace, ScalarField

Array = np.ndarray


class DivergenceError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, step: int, trajectory: "Trajectory"):
        super().__init__(f"non-finite state at step {step}")
        self.step = step
        self.trajectory = trajectory


@dataclass
class Trajectory:
    times: Array
    states: Array
    monitors: dict[str, Array] = field(default_factory=dict)

    @property
    def final(self) -> Array:
        return self.states[-1]


def ham_vector_field(space: PoissonSpace, hamiltonian: ScalarField, point: Array) -> Array:
    """Velocity v_i = {x_i, H}(point) = sum_j B_ij dH/dx_j."""
    space.check_chart(point)
    return space.bivector(point) @ hamiltonian.gradient(point)


def integrate(space: PoissonSpace, hamiltonian: ScalarField, x0: Array, h: float, n_steps: int,
              monitors: dict[str, ScalarField] | None = None) -> Trajectory:
    """Classical fixed-step RK4 on the coordinate chart; monitors at every step."""
    if h <= 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x0, dtype=float).copy()
    monitors = monitors or {}
    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, x.size))
    mon = {name: np.empty(n_steps + 1) for name in monitors}

    def rhs(y: Array) -> Array:
        # an overflowed stage propagates as NaN and trips the divergence check
        if not np.all(np.isfinite(y)):
            return np.full_like(y, np.nan)
        return ham_vector_field(space, hamiltonian, y)

    def record(idx: int, t: float, y: Array) -> None:
        times[idx] = t
        states[idx] = y
        for name, q in monitors.items():
            mon[name][idx] = q(y)

    record(0, 0.0, x)
    for step in range(1, n_steps + 1):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            partial = Trajectory(times[:step], states[:step], {k: v[:step] for k, v in mon.items()})
            raise DivergenceError(step, partial)
        record(step, step * h, x)
    return Trajectory(times, states, mon)


def monitor_drift(trajectory: Trajectory, quantities: dict[str, ScalarField] | None = None) -> dict[str, float]:
    """Per-quantity max |Q(t) - Q(0)| along the trajectory."""
    out: dict[str, float] = {}
    for name, series in trajectory.monitors.items():
        out[name] = float(np.max(np.abs(series - series[0])))
    if quantities:
        for name, q in quantities.items():
            series = np.array([q(s) for s in trajectory.states])
            out[name] = float(np.max(np.abs(series - series[0])))
    return out


def convergence_ratio(space: PoissonSpace, hamiltonian: ScalarField, x0: Array, h: float, t_final: float,
                      quantity: ScalarField) -> tuple[float, float, float]:
    """Drift(h) / Drift(h/2) of a conserved quantity; ~16 for 4th order."""
    n1 = int(round(t_final / h))
    n2 = 2 * n1
    d1 = monitor_drift(integrate(space, hamiltonian, x0, h, n1, {"q": quantity}))["q"]
    d2 = monitor_drift(integrate(space, hamiltonian, x0, h / 2, n2, {"q": quantity}))["q"]
    return d1 / d2 if d2 > 0 else float("inf"), d1, d2


# ---------------------------------------------------------------------------
# the unreduced flow on T*G in body coordinates (for reduction cross-checks)
# ---------------------------------------------------------------------------


def group_cotangent_field(group: LieGroupSpec, reduced_h: ScalarField, u: Array, b: Array) -> tuple[Array, Array]:
    """Hamiltonian vector field on T*G of the invariant lift of a reduced Hamiltonian.

    The lift is f(u, b) = H(Ad*_{u^-1} b); in body coordinates the canonical
    field reads xi = grad_b f, b' = ad*_xi b - d_u f, with the u-derivative of
    the lift given exactly by the coadjoint chain rule.
    """
    u_inv = np.linalg.inv(u)
    trans = group.Ad_star(u_inv)
    mu = trans @ b
    grad_h = reduced_h.gradient(mu)
    xi = trans.T @ grad_h
    du = np.empty(group.dim)
    for j in range(group.dim):
        e = np.zeros(group.dim)
        e[j] = 1.0
        du[j] = float(grad_h @ (-(trans @ (group.ad_star(e) @ b))))
    b_dot = group.ad_star(xi) @ b - du
    return xi, b_dot


def body_cotangent_field(group: LieGroupSpec, F: Callable[[Array, Array], float], u: Array, b: Array,
                         fd: float = 1e-6) -> tuple[Array, Array]:
    """Canonical field on T*G in body coordinates for a general F(u, b).

    xi = grad_b F,  b' = ad*_xi b - d_u F, with both derivatives by central
    differences (d_u along u exp(t e_i)).
    """
    n = group.dim
    grad_b = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = fd
        grad_b[i] = (F(u, b + e) - F(u, b - e)) / (2 * fd)
    du = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = fd
        du[i] = (F(u @ group.exp(e), b) - F(u @ group.exp(-e), b)) / (2 * fd)
    return grad_b, group.ad_star(grad_b) @ b - du


def integrate_body_cotangent(group: LieGroupSpec, F: Callable[[Array, Array], float], u0: Array, b0: Array,
                             h: float, n_steps: int) -> tuple[list[Array], Array]:
    """RK4 on T*G in body coordinates for a general Hamiltonian F(u, b)."""
    m = group.embed

    def rhs(state: Array) -> Array:
        uu = state[: m * m].reshape(m, m)
        bb = state[m * m :]
        xi, b_dot = body_cotangent_field(group, F, uu, bb)
        return np.concatenate([(uu @ group.from_coords(xi)).reshape(-1), b_dot])

    state = np.concatenate([np.asarray(u0, dtype=float).reshape(-1), np.asarray(b0, dtype=float)])
    us = [np.asarray(u0, dtype=float).copy()]
    bs = np.empty((n_steps + 1, group.dim))
    bs[0] = b0
    for step in range(1, n_steps + 1):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise DivergenceError(step, Trajectory(np.arange(step) * h, bs[:step]))
        us.append(state[: m * m].reshape(m, m).copy())
        bs[step] = state[m * m :]
    return us, bs


def integrate_group_cotangent(group: LieGroupSpec, reduced_h: ScalarField, u0: Array, b0: Array,
                              h: float, n_steps: int) -> tuple[list[Array], Array]:
    """RK4 on (u, b) with the matrix part advanced through the embedding."""
    m = group.embed
    u = np.asarray(u0, dtype=float).copy()
    b = np.asarray(b0, dtype=float).copy()
    us = [u.copy()]
    bs = np.empty((n_steps + 1, group.dim))
    bs[0] = b

    def rhs(state: Array) -> Array:
        uu = state[: m * m].reshape(m, m)
        bb = state[m * m :]
        xi, b_dot = group_cotangent_field(group, reduced_h, uu, bb)
        return np.concatenate([(uu @ group.from_coords(xi)).reshape(-1), b_dot])

    state = np.concatenate([u.reshape(-1), b])
    for step in range(1, n_steps + 1):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise DivergenceError(step, Trajectory(np.arange(step) * h, bs[:step]))
        us.append(state[: m * m].reshape(m, m).copy())
        bs[step] = state[m * m :]
    return us, bs


# ---------------------------------------------------------------------------
# trajectory output
# ---------------------------------------------------------------------------


def write_trajectory_csv(trajectory: Trajectory, path: str | Path) -> None:
    """CSV with header time,x1..xn plus one column per monitor."""
    path = Path(path)
    names = [f"x{i+1}" for i in range(trajectory.states.shape[1])]
    mon_names = sorted(trajectory.monitors)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", *names, *mon_names])
        for idx in range(trajectory.times.size):
            row = [f"{trajectory.times[idx]:.17g}"]
            row += [f"{v:.17g}" for v in trajectory.states[idx]]
            row += [f"{trajectory.monitors[m][idx]:.17g}" for m in mon_names]
            writer.writerow(row)


def write_run_metadata(path: str | Path, space: str, hamiltonian: str, h: float, n_steps: int, seed: int) -> None:
    doc = {"space": space, "H": hamiltonian, "h": float(f"{h:.17g}"), "n_steps": n_steps, "seed": seed}
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
