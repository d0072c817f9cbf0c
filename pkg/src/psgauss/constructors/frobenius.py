"""Integration of the total system for spacelike surfaces with harmonic Gauss map
in isothermal coordinates g = mu^2 (du^2 + dv^2):

    x_uu =  (mu_u/mu) x_u - (mu_v/mu) x_v - mu^2 x + c
    x_uv =  (mu_v/mu) x_u + (mu_u/mu) x_v
    x_vv = -(mu_u/mu) x_u + (mu_v/mu) x_v - mu^2 x - c

with c a fixed null vector and ln mu solving Liouville's equation. The state
Y = (x, x_u, x_v) is advanced by classical RK4 along axis-aligned legs.

Default ambient: E^5_1. A null c orthogonal to x, x_u, x_v needs the
orthogonal complement of that spacelike 3-frame to be Lorentzian of dimension
at least 2, so E^5_1 is the smallest choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import dsl
from ..algebra import AmbientVector, Signature
from ..csvio import write_surface
from ..errors import DomainError, IntegrationUnstable, LiouvilleResidualError, ValidationError
from ..jets import MONOMIALS, NCOEF, Jet, JetVector, log
from .liouville import liouville_residual, stereographic_mu

CONSTRAINTS = (
    "<x,x>=1",
    "<x,x_u>=0",
    "<x,x_v>=0",
    "<x_u,x_v>=0",
    "<x_u,x_u>=mu^2",
    "<x_v,x_v>=mu^2",
    "<c,x>=0",
    "<c,x_u>=0",
    "<c,x_v>=0",
)
MU_PRESETS = {"stereographic": lambda: stereographic_mu(1.0)}


@dataclass(frozen=True, eq=False)
class FrobeniusState:
    x: np.ndarray
    xu: np.ndarray
    xv: np.ndarray
    c: np.ndarray
    u: float = 0.0
    v: float = 0.0

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.x, self.xu, self.xv])


def reference_setup():
    """(mu, c, initial state, signature) of the reference run in E^5_1."""
    mu = stereographic_mu(1.0)
    mu0 = 2.0
    e = np.eye(5)
    state = FrobeniusState(x=e[0], xu=mu0 * e[1], xv=mu0 * e[2], c=np.array([0, 0, 0, 1.0, 1.0]))
    return mu, state.c, state, Signature(5, 1)


def _as_array(a, n=None) -> np.ndarray:
    if isinstance(a, AmbientVector):
        a = a.coords
    a = np.asarray(a, float)
    if n is not None and a.shape != (n,):
        raise ValidationError(f"expected a vector with {n} components, got shape {a.shape}")
    return a


def constraint_values(Y: np.ndarray, c: np.ndarray, mu: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """The nine constraint deviations, shape (..., 9), for states Y (..., 3n)."""
    n = len(signs)
    x, xu, xv = Y[..., :n], Y[..., n:2 * n], Y[..., 2 * n:]

    def ip(a, b):
        return np.sum(a * b * signs, axis=-1)

    m2 = np.asarray(mu) ** 2
    return np.stack(
        [
            ip(x, x) - 1.0,
            ip(x, xu),
            ip(x, xv),
            ip(xu, xv),
            ip(xu, xu) - m2,
            ip(xv, xv) - m2,
            ip(c, x),
            ip(c, xu),
            ip(c, xv),
        ],
        axis=-1,
    )


@dataclass(frozen=True)
class InitialDataCheck:
    residuals: dict
    null_c: float
    tol: float

    @property
    def passed(self) -> bool:
        return not self.failures()

    def failures(self) -> list[str]:
        out = [f"{k} violated by {v:.3g}" for k, v in self.residuals.items() if v > self.tol]
        if self.null_c > self.tol:
            out.insert(0, f"<c,c>=0 violated by {self.null_c:.3g}")
        if not self.residuals:
            out.append("no data")
        return out


def initial_data_validate(x, xu, xv, c, mu0: float, signature: Signature, tol: float = 1e-10) -> InitialDataCheck:
    """Check the nine invariants and that c is null and nonzero."""
    n = signature.dimension
    x, xu, xv, c = (_as_array(a, n) for a in (x, xu, xv, c))
    signs = signature.signs
    vals = constraint_values(np.concatenate([x, xu, xv]), c, mu0, signs)
    res = {k: float(abs(val)) for k, val in zip(CONSTRAINTS, vals)}
    cc = abs(float(np.sum(c * c * signs)))
    if not np.any(c != 0):
        cc = math.inf  # the zero vector is not lightlike
    return InitialDataCheck(res, cc, tol)


class _Mu:
    """mu and its log-derivatives; first derivatives are taken symbolically once."""

    def __init__(self, node: dsl.Node):
        self.node = node
        self.node_u = dsl.diff(node, "u")
        self.node_v = dsl.diff(node, "v")

    def coefficients(self, u, v):
        """(mu, mu_u/mu, mu_v/mu) as arrays."""
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))

        def ev(node):
            return np.broadcast_to(dsl.evaluate_float(node, u, v), u.shape)

        mu = ev(self.node)
        if np.any(~(mu > 0)):
            raise LiouvilleResidualError("mu must be positive")
        return mu, ev(self.node_u) / mu, ev(self.node_v) / mu


def _rhs(axis: int, Y: np.ndarray, mu, p, q, c, n):
    """d/du (axis 0) or d/dv (axis 1) of Y = (x, x_u, x_v)."""
    x, xu, xv = Y[:, :n], Y[:, n:2 * n], Y[:, 2 * n:]
    p, q, m2 = p[:, None], q[:, None], (mu**2)[:, None]
    xuv = q * xu + p * xv
    if axis == 0:
        xuu = p * xu - q * xv - m2 * x + c
        return np.concatenate([xu, xuu, xuv], axis=1)
    xvv = -p * xu + q * xv - m2 * x - c
    return np.concatenate([xv, xuv, xvv], axis=1)


@dataclass
class _Track:
    """Drift bookkeeping along an integration."""

    signs: np.ndarray
    c: np.ndarray
    mu: _Mu
    drift: np.ndarray = field(default_factory=lambda: np.zeros(len(CONSTRAINTS)))
    steps: int = 0

    def observe(self, Y, u, v):
        m = self.mu.coefficients(u, v)[0]
        dev = np.max(np.abs(constraint_values(Y, self.c, m, self.signs)), axis=0)
        self.drift = np.maximum(self.drift, dev)


def _leg(Y, fixed, s0, s1, axis, step, mu, c, track: _Track, sample_every=0):
    """RK4 from s0 to s1 along ``axis`` for a batch of states at coordinate
    ``fixed`` on the other axis. Returns the end states and optional samples."""
    n = Y.shape[1] // 3
    length = s1 - s0
    nsteps = max(1, int(round(abs(length) / step))) if length else 0
    h = length / nsteps if nsteps else 0.0
    fixed = np.asarray(fixed, float)
    samples = []

    def coords(s):
        s = np.full_like(fixed, s)
        return (s, fixed) if axis == 0 else (fixed, s)

    def f(s, Z):
        mu_, p, q = mu.coefficients(*coords(s))
        return _rhs(axis, Z, mu_, p, q, c, n)

    for k in range(nsteps):
        s = s0 + k * h
        k1 = f(s, Y)
        k2 = f(s + h / 2, Y + (h / 2) * k1)
        k3 = f(s + h / 2, Y + (h / 2) * k2)
        k4 = f(s + h, Y + h * k3)
        Y = Y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        s_next = s0 + (k + 1) * h if k + 1 < nsteps else s1
        track.observe(Y, *coords(s_next))
        track.steps += 1
        if k + 1 == nsteps or (sample_every and (k + 1) % sample_every == 0):
            samples.append((*coords(s_next), Y))
    return Y, samples


@dataclass(frozen=True, eq=False)
class FrobeniusSurface:
    """Sampled states (x, x_u, x_v) of an integrated surface.

    Calling it with chart points that were sampled returns order-3 jets of x
    there, recovered from the system itself, so it can be fed to the
    classifier like any immersion.
    """

    signature: Signature
    mu: dsl.Node
    c: np.ndarray
    u: np.ndarray       # (B,)
    v: np.ndarray       # (B,)
    states: np.ndarray  # (B, 3n)
    drift: dict         # constraint -> max |deviation| over every step
    steps: int
    step: float

    @property
    def max_drift(self) -> float:
        return max(self.drift.values())

    @property
    def x(self) -> np.ndarray:
        return self.states[:, : self.signature.dimension]

    def index_of(self, u, v) -> np.ndarray:
        table = {(float(a), float(b)): i for i, (a, b) in enumerate(zip(self.u, self.v))}
        u, v = np.broadcast_arrays(np.atleast_1d(np.asarray(u, float)), np.atleast_1d(np.asarray(v, float)))
        try:
            return np.array([table[(float(a), float(b))] for a, b in zip(u, v)], dtype=int)
        except KeyError as exc:
            raise DomainError(f"chart point {exc.args[0]} was not sampled") from None

    def __call__(self, u, v) -> JetVector:
        idx = self.index_of(u, v)
        return lift_jets(self.mu, self.c, self.signature, self.u[idx], self.v[idx], self.states[idx])

    def to_csv(self, path_or_file):
        write_surface(path_or_file, self.u, self.v, self.x)


def lift_jets(mu: dsl.Node, c, signature: Signature, u, v, states) -> JetVector:
    """Order-3 Taylor jets of x at each state, by three rounds of
    ``Y_{a+1,b} = (D_u Y)_{a,b} / (a+1)`` and ``Y_{0,b+1} = (D_v Y)_{0,b} / (b+1)``;
    each round makes one more order exact."""
    n = signature.dimension
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    ju, jv = dsl.seeds(u, v)
    m = dsl.evaluate_jet(mu, ju, jv)
    lm = log(m)
    p, q = lm.du.expand(-1), lm.dv.expand(-1)
    m2 = (m * m).expand(-1)
    cj = Jet.constant(np.broadcast_to(np.asarray(c, float), (len(u), n)))

    coef = np.zeros(states.shape + (NCOEF,))
    coef[..., 0] = states
    shift_u = [(k, MONOMIALS.index((a + 1, b)), a + 1) for k, (a, b) in enumerate(MONOMIALS) if a + b < 3]
    shift_v = [(k, MONOMIALS.index((0, b + 1)), b + 1) for k, (a, b) in enumerate(MONOMIALS) if a == 0 and b < 3]
    for _ in range(3):
        Y = Jet(coef)
        x, xu, xv = Y[:, :n], Y[:, n:2 * n], Y[:, 2 * n:]
        xuv = q * xu + p * xv
        du = [xu, p * xu - q * xv - m2 * x + cj, xuv]
        dv = [xv, xuv, -1.0 * (p * xu) + q * xv - m2 * x - cj]
        Du = np.concatenate([j.c for j in du], axis=1)
        Dv = np.concatenate([j.c for j in dv], axis=1)
        new = np.zeros_like(coef)
        new[..., 0] = states
        for k, dst, d in shift_u:
            new[..., dst] = Du[..., k] / d
        for k, dst, d in shift_v:
            new[..., dst] = Dv[..., k] / d
        coef = new
    return JetVector(Jet(coef[:, :n]), signature)


def _check_inputs(mu: dsl.Node, c, initial: FrobeniusState, signature: Signature, corners, tol):
    n = signature.dimension
    c = _as_array(c, n)
    m0 = _Mu(mu).coefficients(np.array([initial.u]), np.array([initial.v]))[0][0]
    check = initial_data_validate(initial.x, initial.xu, initial.xv, c, m0, signature, tol)
    if not check.passed:
        raise ValidationError("initial data rejected: " + "; ".join(check.failures()))
    us, vs = [p[0] for p in corners], [p[1] for p in corners]
    gu, gv = dsl.make_grid((min(us), max(us)), (min(vs), max(vs)), 9, 9)
    res = float(np.max(np.abs(liouville_residual(mu, gu, gv))))
    if not res <= 1e-8:
        raise LiouvilleResidualError(f"mu violates Liouville's equation on the path hull (residual {res:.3g})")
    return c


def expected_drift_bound(step: float, length: float, nsteps: int, scale: float = 1.0) -> float:
    """Crude a priori drift scale: truncation step^4 * length plus rounding."""
    return step**4 * length * scale + nsteps * np.finfo(float).eps * scale


def _finish(track, step, length, scale):
    drift = {k: float(v) for k, v in zip(CONSTRAINTS, track.drift)}
    bound = expected_drift_bound(step, length, track.steps, scale)
    worst = max(drift.values())
    if not worst <= 1e2 * bound:
        raise IntegrationUnstable(f"constraint drift {worst:.3g} exceeds 100x the expected bound {bound:.3g}")
    return drift


def _validate_path(start, path):
    pts = [tuple(map(float, start))] + [tuple(map(float, p)) for p in path]
    for (a, b), (c_, d) in zip(pts, pts[1:]):
        if a != c_ and b != d:
            raise ValidationError(f"path leg {(a, b)} -> {(c_, d)} is not axis-aligned")
    return pts


def frobenius_integrate(
    mu: dsl.Node,
    c,
    initial: FrobeniusState,
    path,
    step: float = 1e-3,
    signature: Signature = Signature(5, 1),
    sample_every: int = 10,
    tol: float = 1e-10,
) -> FrobeniusSurface:
    """Integrate along the polyline ``initial -> path[0] -> path[1] ...``.

    States are recorded every ``sample_every`` steps and at every vertex.
    Raises IntegrationUnstable if the drift of the nine invariants exceeds
    100 times :func:`expected_drift_bound`.
    """
    if not step > 0:
        raise ValidationError("step must be positive")
    pts = _validate_path((initial.u, initial.v), path)
    c = _check_inputs(mu, c, initial, signature, pts, tol)
    m = _Mu(mu)
    track = _Track(signature.signs, c, m)
    Y = initial.stacked()[None, :]
    track.observe(Y, np.array([initial.u]), np.array([initial.v]))
    us, vs, ys = [initial.u], [initial.v], [Y[0]]
    length = 0.0
    for (a, b), (a1, b1) in zip(pts, pts[1:]):
        if a != a1:
            Y, samples = _leg(Y, [b], a, a1, 0, step, m, c, track, sample_every)
        elif b != b1:
            Y, samples = _leg(Y, [a], b, b1, 1, step, m, c, track, sample_every)
        else:
            continue
        length += abs(a1 - a) + abs(b1 - b)
        for su, sv, sy in samples:
            us.append(float(su[0]))
            vs.append(float(sv[0]))
            ys.append(sy[0])
    scale = float(np.max(np.abs(np.stack(ys)))) ** 2
    drift = _finish(track, step, length, scale)
    return FrobeniusSurface(signature, mu, c, np.array(us), np.array(vs), np.stack(ys), drift, track.steps, step)


def frobenius_sweep(
    mu: dsl.Node,
    c,
    initial: FrobeniusState,
    u_values,
    v_values,
    step: float = 1e-3,
    signature: Signature = Signature(5, 1),
    tol: float = 1e-10,
) -> FrobeniusSurface:
    """States on the tensor grid ``u_values x v_values`` (u-major order):
    first along u at v = initial.v, then along v from every u column."""
    if not step > 0:
        raise ValidationError("step must be positive")
    u_values = np.asarray(u_values, float)
    v_values = np.asarray(v_values, float)
    corners = [(initial.u, initial.v)] + [(a, b) for a in u_values[[0, -1]] for b in v_values[[0, -1]]]
    c = _check_inputs(mu, c, initial, signature, corners, tol)
    m = _Mu(mu)
    track = _Track(signature.signs, c, m)
    Y0 = initial.stacked()[None, :]
    track.observe(Y0, np.array([initial.u]), np.array([initial.v]))

    def march(Y, fixed, s_start, targets, axis):
        """States at every target, stepping outward from s_start in both directions."""
        out = {}
        for direction in (1, -1):
            side = sorted((t for t in set(targets.tolist()) if (t - s_start) * direction >= 0), key=lambda t: abs(t - s_start))
            Z, s = Y, s_start
            for t in side:
                if t != s:
                    Z, _ = _leg(Z, fixed, s, t, axis, step, m, c, track)
                    s = t
                out[t] = Z
        return np.stack([out[t] for t in targets.tolist()], axis=1)

    row = march(Y0, [initial.v], initial.u, u_values, 0)[0]               # (nu, 3n)
    grid = march(row, u_values, initial.v, v_values, 1)  # (nu, nv, 3n)
    U, V = np.meshgrid(u_values, v_values, indexing="ij")
    states = grid.reshape(-1, grid.shape[-1])
    length = float(np.ptp(np.append(u_values, initial.u)) + np.ptp(np.append(v_values, initial.v)))
    drift = _finish(track, step, length, float(np.max(np.abs(states))) ** 2)
    return FrobeniusSurface(signature, mu, c, U.ravel(), V.ravel(), states, drift, track.steps, step)


def endpoint(mu, c, initial, path, step=1e-3, signature=Signature(5, 1)) -> np.ndarray:
    """Final state (x, x_u, x_v) after following ``path``."""
    surf = frobenius_integrate(mu, c, initial, path, step, signature, sample_every=0)
    return surf.states[-1]
