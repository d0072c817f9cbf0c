"""Newton solver for Liouville's equation  w_uu + w_vv + e^{2w} = 0  (w = ln mu)
on a rectangle with Dirichlet data.

Two discretizations are offered. ``five_point`` is the standard second-order
stencil. ``compact`` (the default) is the fourth-order Mehrstellen scheme

    L9 w + (8 f_C + f_E + f_W + f_N + f_S) / 12 = 0,   f = e^{2w},
    L9 w = (4 (w_E + w_W + w_N + w_S) + w_NE + w_NW + w_SE + w_SW - 20 w_C) / (6 h^2),

which needs square cells. The equation generally has more than one solution
for given boundary data; Newton follows the branch nearest to ``initial``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .. import dsl
from ..csvio import write_rows
from ..errors import LiouvilleNonConvergence, ValidationError
from ..geometry import MetricSample, intrinsic_curvature
from ..jets import Jet, log

SCHEMES = ("compact", "five_point")


def stereographic_w(alpha: float = 1.0):
    """w_alpha = ln(2 alpha / (1 + alpha^2 (u^2 + v^2))), an exact solution."""

    def w(u, v):
        return np.log(2.0 * alpha / (1.0 + alpha**2 * (np.asarray(u) ** 2 + np.asarray(v) ** 2)))

    return w


def stereographic_mu(alpha: float = 1.0) -> dsl.Node:
    """mu = e^{w_alpha} as an expression tree."""
    return dsl.parse_expression("2*a/(1 + a^2*(u^2 + v^2))", {"a": float(alpha)})


@dataclass(frozen=True, eq=False)
class LiouvilleSolution:
    u: np.ndarray          # (n,)
    v: np.ndarray          # (n,)
    w: np.ndarray          # (n, n), w[i, j] = w(u_i, v_j)
    residual: np.ndarray   # (n, n), zero on the boundary
    iterations: int
    history: list          # max |update| per Newton step
    scheme: str
    closed_form: float | None = None   # alpha when the data come from the exact family
    max_error: float | None = None     # interior max |w - w_alpha|

    @property
    def mu(self) -> np.ndarray:
        return np.exp(self.w)

    def interior_residual(self) -> float:
        return float(np.max(np.abs(self.residual[1:-1, 1:-1])))

    def rows(self):
        for i, uu in enumerate(self.u):
            for j, vv in enumerate(self.v):
                yield uu, vv, self.w[i, j], self.residual[i, j]

    def to_csv(self, path_or_file):
        write_rows(path_or_file, ["u", "v", "w", "residual"], self.rows())


def _coons(w: np.ndarray) -> np.ndarray:
    """Transfinite interpolation of the boundary values into the interior."""
    n, m = w.shape
    s = np.linspace(0.0, 1.0, n)[:, None]
    t = np.linspace(0.0, 1.0, m)[None, :]
    out = (
        (1 - s) * w[0:1, :] + s * w[-1:, :] + (1 - t) * w[:, 0:1] + t * w[:, -1:]
        - (1 - s) * (1 - t) * w[0, 0] - (1 - s) * t * w[0, -1] - s * (1 - t) * w[-1, 0] - s * t * w[-1, -1]
    )
    out[0, :], out[-1, :], out[:, 0], out[:, -1] = w[0, :], w[-1, :], w[:, 0], w[:, -1]
    return out


class _Operator:
    def __init__(self, n: int, hu: float, hv: float, scheme: str):
        m = n - 2
        I = sp.identity(m, format="csr")
        if scheme == "five_point":
            D = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(m, m))
            self.L = (sp.kron(D, I) / hu**2 + sp.kron(I, D) / hv**2).tocsr()
            self.M = None
        else:
            A = sp.diags([1.0, 1.0], [-1, 1], shape=(m, m))
            nb = sp.kron(A, I) + sp.kron(I, A)
            self.L = ((4.0 * nb + sp.kron(A, A) - 20.0 * sp.identity(m * m)) / (6.0 * hu**2)).tocsr()
            self.M = ((8.0 * sp.identity(m * m) + nb) / 12.0).tocsr()
        self.scheme, self.hu, self.hv = scheme, hu, hv

    def residual(self, w: np.ndarray) -> np.ndarray:
        C = w[1:-1, 1:-1]
        E, W, N, S = w[2:, 1:-1], w[:-2, 1:-1], w[1:-1, 2:], w[1:-1, :-2]
        f = np.exp(2.0 * w)
        if self.scheme == "five_point":
            return (E - 2 * C + W) / self.hu**2 + (N - 2 * C + S) / self.hv**2 + f[1:-1, 1:-1]
        corners = w[2:, 2:] + w[:-2, 2:] + w[2:, :-2] + w[:-2, :-2]
        lap = (4.0 * (E + W + N + S) + corners - 20.0 * C) / (6.0 * self.hu**2)
        src = (8.0 * f[1:-1, 1:-1] + f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2]) / 12.0
        return lap + src

    def jacobian(self, w: np.ndarray):
        d = sp.diags(2.0 * np.exp(2.0 * w[1:-1, 1:-1]).ravel())
        J = self.L + (d if self.M is None else self.M @ d)
        return J.tocsc()


def liouville_solve(
    boundary=None,
    u_range=(-1.0, 1.0),
    v_range=(-1.0, 1.0),
    n: int = 65,
    tol: float = 1e-10,
    max_iter: int = 30,
    scheme: str = "compact",
    initial=None,
    closed_form: float | None = None,
) -> LiouvilleSolution:
    """Solve on an n-by-n grid.

    ``boundary`` is a callable w(u, v) or an (n, n) array (only its edge is
    read). ``initial`` (callable or array) seeds the interior; the default is
    the transfinite interpolation of the boundary. With ``closed_form=alpha``
    the boundary (if not given) and the initial guess come from w_alpha, and the
    interior error against it is recorded.
    """
    if n < 9:
        raise ValidationError("grid needs n >= 9")
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    u = np.linspace(*u_range, n)
    v = np.linspace(*v_range, n)
    U, V = np.meshgrid(u, v, indexing="ij")
    hu, hv = u[1] - u[0], v[1] - v[0]
    if not (hu > 0 and hv > 0):
        raise ValidationError("empty domain")
    if scheme == "compact" and not math.isclose(hu, hv, rel_tol=1e-12):
        raise ValidationError("the compact scheme needs square cells (equal u and v spacing)")

    exact = stereographic_w(closed_form) if closed_form is not None else None
    if boundary is None:
        if exact is None:
            raise ValidationError("boundary data required")
        boundary = exact
    edge = np.asarray(boundary(U, V) if callable(boundary) else boundary, float)
    if edge.shape != (n, n):
        raise ValidationError(f"boundary array must have shape {(n, n)}")
    rim = np.concatenate([edge[0], edge[-1], edge[:, 0], edge[:, -1]])
    if not np.all(np.isfinite(rim)):
        raise ValidationError("boundary data must be finite")

    if initial is None and exact is not None:
        initial = exact
    if initial is None:
        w = _coons(edge)
    else:
        w = np.array(initial(U, V) if callable(initial) else initial, float)
    w[0, :], w[-1, :], w[:, 0], w[:, -1] = edge[0, :], edge[-1, :], edge[:, 0], edge[:, -1]

    op = _Operator(n, hu, hv, scheme)
    history = []
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, max_iter + 1):
            r = op.residual(w)
            if not np.all(np.isfinite(r)):
                raise LiouvilleNonConvergence("Newton iterate overflowed", history)
            dw = spla.spsolve(op.jacobian(w), -r.ravel())
            step = float(np.max(np.abs(dw))) if np.all(np.isfinite(dw)) else math.inf
            history.append(step)
            if not math.isfinite(step):
                raise LiouvilleNonConvergence("Newton update is not finite", history)
            w[1:-1, 1:-1] += dw.reshape(n - 2, n - 2)
            if step <= tol:
                break
        else:
            raise LiouvilleNonConvergence(f"no convergence within {max_iter} Newton steps", history)

    res = np.zeros_like(w)
    res[1:-1, 1:-1] = op.residual(w)
    err = None
    if exact is not None:
        err = float(np.max(np.abs(w - exact(U, V))[1:-1, 1:-1]))
    return LiouvilleSolution(u, v, w, res, it, history, scheme, closed_form, err)


def conformal_metric(mu: dsl.Node, u, v) -> MetricSample:
    """The metric mu^2 (du^2 + dv^2) as jets at the points (u, v)."""
    ju, jv = dsl.seeds(u, v)
    m = dsl.evaluate_jet(mu, ju, jv)
    g = m * m
    zero = Jet.constant(np.zeros(g.shape))
    return MetricSample(g, zero, g, g * g, np.zeros(g.shape, int))


def conformal_curvature(mu: dsl.Node, u, v) -> np.ndarray:
    """Gaussian curvature of mu^2 (du^2 + dv^2); equals 1 exactly when ln mu
    solves Liouville's equation."""
    return intrinsic_curvature(conformal_metric(mu, u, v))


def liouville_residual(mu: dsl.Node, u, v) -> np.ndarray:
    """(ln mu)_uu + (ln mu)_vv + mu^2 at the points, from jets."""
    ju, jv = dsl.seeds(u, v)
    m = dsl.evaluate_jet(mu, ju, jv)
    lm = log(m)
    return lm.partial(2, 0) + lm.partial(0, 2) + m.value**2
