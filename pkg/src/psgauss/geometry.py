"""Extrinsic geometry of a surface x(u, v) in the pseudo-sphere S^m_s(1).

Every quantity is computed from the order-3 jet of x at a batch of chart
points. Frames are built by Gram-Schmidt carried out in jet arithmetic, so they
are themselves jets and can be differentiated once more (twice for the
tangent frame). All per-point results are returned as arrays whose leading
axis is the batch axis.

Conventions:

* ``e_i = sum_a T[a][i] x_a`` relates the orthonormal tangent frame to the
  coordinate fields ``x_u, x_v``; ``T`` is positively oriented.
* ``h`` is the second fundamental form of M in the sphere (the component of
  the flat second derivative along the sphere normals ``e_3 .. e_m``; the
  ``x`` direction is dropped).
* The Laplacian is the positive-spectrum one,
  ``Delta f = -(1/sqrt|g|) d_i (sqrt|g| g^{ij} d_j f)``, so that ``Delta x = 2x``
  for a minimal surface.
* ``R^D`` components are ``RD[r, s] = <R^D(e_1, e_2) e_r, e_s>`` with
  ``R(X, Y) = [D_X, D_Y] - D_[X,Y]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import jets
from .algebra import Signature
from .errors import DegenerateMetric, DegenerateSpan
from .jets import Jet, JetVector

NULL_SEED_THRESHOLD = 1e-6
DEGENERACY_TOL = 1e-12
PIVOT_TOL = 1e-9


def _ip(a: Jet, b: Jet, signs) -> Jet:
    return jets.inner(a, b, signs)


def _sgn(x) -> np.ndarray:
    return np.where(np.asarray(x) < 0, -1.0, 1.0)


def _col(j: Jet) -> Jet:
    """(B,) -> (B, 1): scalar jets broadcast against vector jets."""
    return j.expand(-1)


def _scale(v: Jet, k) -> Jet:
    """Multiply a (B, n) jet by a per-point scalar jet or array."""
    if isinstance(k, Jet):
        return v * _col(k)
    return v * np.asarray(k, float)[..., None]


def _rsqrt(n: Jet, sign) -> Jet:
    return jets.reciprocal(jets.sqrt(n * sign))


@dataclass(frozen=True, eq=False)
class MetricSample:
    g11: Jet
    g12: Jet
    g22: Jet
    det: Jet
    index: np.ndarray  # surface index t per point

    @property
    def det_sign(self) -> np.ndarray:
        return _sgn(self.det.value)

    def inverse(self):
        """(g^11, g^12, g^22) as jets."""
        r = jets.reciprocal(self.det)
        return self.g22 * r, -self.g12 * r, self.g11 * r

    def values(self) -> np.ndarray:
        """Base-point metric as (B, 2, 2)."""
        g11, g12, g22 = self.g11.value, self.g12.value, self.g22.value
        return np.stack([np.stack([g11, g12], -1), np.stack([g12, g22], -1)], -2)


def first_fundamental_form(x: JetVector) -> MetricSample:
    signs = x.signature.signs
    xu, xv = x.components.du, x.components.dv
    g11, g12, g22 = _ip(xu, xu, signs), _ip(xu, xv, signs), _ip(xv, xv, signs)
    det = g11 * g22 - g12 * g12
    scale = np.maximum.reduce([np.abs(g11.value), np.abs(g12.value), np.abs(g22.value)])
    bad = ~(np.abs(det.value) >= DEGENERACY_TOL * scale**2) | (scale == 0)
    if np.any(bad):
        raise DegenerateMetric(f"induced metric degenerate at {int(np.sum(bad))} sample(s)")
    index = np.where(det.value > 0, 0, 1)
    return MetricSample(g11, g12, g22, det, index)


@dataclass(frozen=True, eq=False)
class Frame:
    position: Jet            # x, (B, n)
    tangent: tuple           # (e1, e2), each (B, n)
    tangent_signs: np.ndarray  # (B, 2)
    to_chart: tuple          # T[a][i] jets (B,)
    null_seed: np.ndarray    # (B,) bool, True where the (x_u +- x_v) seed was used
    normals: tuple = ()      # (e3, ..., em), each (B, n)
    normal_signs: np.ndarray = None  # (B, m-2)
    signature: Signature = None

    @property
    def vectors(self):
        return (self.position,) + tuple(self.tangent) + tuple(self.normals)

    @property
    def signs(self) -> np.ndarray:
        ones = np.ones((self.tangent_signs.shape[0], 1))
        parts = [ones, self.tangent_signs]
        if self.normal_signs is not None:
            parts.append(self.normal_signs)
        return np.concatenate(parts, axis=1)

    def orthonormality_residual(self) -> np.ndarray:
        """max |<f_a, f_b> - s_a delta_ab| at each base point over the full frame."""
        vs = [v.value for v in self.vectors]
        sg = self.signature.signs
        signs = self.signs
        out = np.zeros(vs[0].shape[0])
        for a, b in itertools.combinations_with_replacement(range(len(vs)), 2):
            q = np.sum(vs[a] * vs[b] * sg, axis=-1)
            target = signs[:, a] if a == b else 0.0
            out = np.maximum(out, np.abs(q - target))
        return out

    def orientation(self) -> np.ndarray:
        """det of (x, e1, ..., em) against the standard basis, per point."""
        M = np.stack([v.value for v in self.vectors], axis=-2)
        return np.linalg.det(M)


def tangent_frame(x: JetVector, metric: MetricSample, tol: float = NULL_SEED_THRESHOLD) -> Frame:
    signs = x.signature.signs
    xu, xv = x.components.du, x.components.dv
    g = metric
    scale = np.maximum.reduce([np.abs(g.g11.value), np.abs(g.g12.value), np.abs(g.g22.value)])
    null = np.abs(g.g11.value) < tol * scale
    m = null[:, None]
    s1 = Jet.where(m, xu + xv, xu)
    s2 = Jet.where(m, xu - xv, xv)
    n1 = _ip(s1, s1, signs)
    swap = np.abs(n1.value) < tol * scale
    s1, s2 = Jet.where(swap[:, None], s2, s1), Jet.where(swap[:, None], s1, s2)

    n1 = _ip(s1, s1, signs)
    eps1 = _sgn(n1.value)
    e1 = _scale(s1, _rsqrt(n1, eps1))
    w = s2 - _scale(e1, _ip(s2, e1, signs) * eps1)
    n2 = _ip(w, w, signs)
    if np.any(np.abs(n2.value) < DEGENERACY_TOL * scale):
        raise DegenerateMetric("second tangent direction is null")
    eps2 = _sgn(n2.value)
    e2 = _scale(w, _rsqrt(n2, eps2))

    # Lorentzian surfaces: spacelike vector first
    sw = (eps1 < 0) & (eps2 > 0)
    e1, e2 = Jet.where(sw[:, None], e2, e1), Jet.where(sw[:, None], e1, e2)
    eps1, eps2 = np.where(sw, eps2, eps1), np.where(sw, eps1, eps2)

    gi11, gi12, gi22 = g.inverse()
    P = [[_ip(xa, ei, signs) for ei in (e1, e2)] for xa in (xu, xv)]
    detP = P[0][0].value * P[1][1].value - P[0][1].value * P[1][0].value
    flip = _sgn(detP) * g.det_sign < 0
    e2 = Jet.where(flip[:, None], -e2, e2)
    P[0][1] = Jet.where(flip, -P[0][1], P[0][1])
    P[1][1] = Jet.where(flip, -P[1][1], P[1][1])
    T = (
        (gi11 * P[0][0] + gi12 * P[1][0], gi11 * P[0][1] + gi12 * P[1][1]),
        (gi12 * P[0][0] + gi22 * P[1][0], gi12 * P[0][1] + gi22 * P[1][1]),
    )
    return Frame(
        position=x.components,
        tangent=(e1, e2),
        tangent_signs=np.stack([eps1, eps2], axis=1),
        to_chart=T,
        null_seed=null | swap,
        signature=x.signature,
    )


def _pick(W: Jet, signs, tol):
    """Per point, choose the candidate row of W (B, k, n) with largest |<w,w>| at base.

    Falls back to sums/differences of candidate pairs where every single
    candidate is null.
    """
    B, k = W.shape[0], W.shape[1]
    q = np.abs(np.sum(W.value * W.value * signs, axis=-1))
    best = np.argmax(q, axis=1)
    rows = np.arange(B)
    chosen = W[rows, best]
    weak = q[rows, best] <= tol
    if np.any(weak):
        pairs = [(a, b, s) for a in range(k) for b in range(a + 1, k) for s in (1.0, -1.0)]
        P = Jet.stack([W[:, a] + W[:, b] * s for a, b, s in pairs], axis=1)
        pq = np.abs(np.sum(P.value * P.value * signs, axis=-1))
        pbest = np.argmax(pq, axis=1)
        if np.any(pq[rows, pbest][weak] <= tol):
            raise DegenerateSpan("normal space is degenerate at some sample")
        chosen = Jet.where(weak[:, None], P[rows, pbest], chosen)
    return chosen


def normal_frame(x: JetVector, frame: Frame, tol: float = PIVOT_TOL) -> Frame:
    """Complete {x, e1, e2} to an orthonormal basis by pivoted Gram-Schmidt
    over the standard basis; the pivot is chosen from base-point values."""
    sig = x.signature
    n = sig.dimension
    signs = sig.signs
    B = x.components.shape[0]
    xx = _ip(x.components, x.components, signs)
    built = [x.components, *frame.tangent]
    bsigns = [_sgn(xx.value), frame.tangent_signs[:, 0], frame.tangent_signs[:, 1]]
    ident = Jet.constant(np.broadcast_to(np.eye(n), (B, n, n)))
    normals, nsigns = [], []
    for _ in range(n - 3):
        W = ident
        for f, s in zip(built, bsigns):
            # <E_k, f> = signs[k] f_k
            coef = f * (signs * s[:, None])
            W = W - coef.expand(-1) * f.expand(-2)
        w = _pick(W, signs, tol)
        q = _ip(w, w, signs)
        s = _sgn(q.value)
        e = _scale(w, _rsqrt(q, s))
        built.append(e)
        bsigns.append(s)
        normals.append(e)
        nsigns.append(s)
    return Frame(
        position=frame.position,
        tangent=frame.tangent,
        tangent_signs=frame.tangent_signs,
        to_chart=frame.to_chart,
        null_seed=frame.null_seed,
        normals=tuple(normals),
        normal_signs=np.stack(nsigns, axis=1) if nsigns else np.zeros((B, 0)),
        signature=sig,
    )


@dataclass(frozen=True, eq=False)
class GeometrySample:
    """Base-point geometry over a batch of chart points (leading axis B)."""

    t: np.ndarray              # surface index per point
    eps: np.ndarray            # (B, 2) tangent signs
    normal_signs: np.ndarray   # (B, m-2)
    h: np.ndarray              # (B, 2, 2, n) h(e_i, e_j)
    h_coord: np.ndarray        # (B, 2, 2, n) h(d_a, d_b)
    H: np.ndarray              # (B, n)
    DH: np.ndarray             # (B, 2, n) D_{e_i} H
    A: np.ndarray              # (B, m-2, 2, 2) shape operators in the frame, A[r][j, i]
    K_intrinsic: np.ndarray
    K_extrinsic: np.ndarray
    S: np.ndarray              # scalar curvature 2K
    S_h: np.ndarray
    RD: np.ndarray             # (B, m-2, m-2) R^D via the normal connection
    RD_ricci: np.ndarray       # (B, m-2, m-2) R^D via [A_r, A_s]
    codazzi: np.ndarray        # (B,) max Codazzi asymmetry (frame components)
    frame_residual: np.ndarray
    T: np.ndarray              # (B, 2, 2) base values of the frame-to-chart matrix

    @property
    def H_norm(self) -> np.ndarray:
        return np.max(np.abs(self.H), axis=-1) if self.H.size else np.zeros(len(self.t))

    def H_euclid(self) -> np.ndarray:
        return np.sqrt(np.sum(self.H * self.H, axis=-1))


def _proj(v: Jet, normals, nsigns, signs) -> Jet:
    """Component of v along the sphere-normal directions e_3..e_m."""
    out = None
    for r, e in enumerate(normals):
        term = _scale(e, _ip(v, e, signs) * nsigns[:, r])
        out = term if out is None else out + term
    if out is None:
        return v * 0.0
    return out


def _christoffel(metric: MetricSample):
    """Gamma[k][i][j] jets (order 1)."""
    g = ((metric.g11, metric.g12), (metric.g12, metric.g22))
    gi = metric.inverse()
    ginv = ((gi[0], gi[1]), (gi[1], gi[2]))
    dg = [[[g[i][j].d(a) for j in range(2)] for i in range(2)] for a in range(2)]  # dg[a][i][j]
    G = [[[None] * 2 for _ in range(2)] for _ in range(2)]
    for k in range(2):
        for i in range(2):
            for j in range(2):
                acc = None
                for l in range(2):
                    term = ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
                    acc = term if acc is None else acc + term
                G[k][i][j] = acc * 0.5
    return G


def intrinsic_curvature(metric: MetricSample) -> np.ndarray:
    """Gauss curvature from the metric jets alone (either signature)."""
    G = _christoffel(metric)
    g = ((metric.g11.value, metric.g12.value), (metric.g12.value, metric.g22.value))

    def R(l, i, j, k):
        # R(d_j, d_k) d_i = R^l_{ijk} d_l
        val = G[l][k][i].d(j).value - G[l][j][i].d(k).value
        for m_ in range(2):
            val = val + G[l][j][m_].value * G[m_][k][i].value - G[l][k][m_].value * G[m_][j][i].value
        return val

    R1212 = sum(g[0][l] * R(l, 1, 0, 1) for l in range(2))
    return R1212 / metric.det.value


def laplace_beltrami(f: Jet, metric: MetricSample) -> np.ndarray:
    """Positive-spectrum Laplace-Beltrami operator at the base points.

    ``f`` needs order >= 2 and leading shape (B, ...); the metric jets order >= 1.
    """
    extra = len(f.shape) - len(metric.det.shape)

    def bc(j: Jet) -> Jet:
        for _ in range(extra):
            j = j.expand(-1)
        return j

    sq = jets.sqrt(metric.det * metric.det_sign)
    gi11, gi12, gi22 = metric.inverse()
    fu, fv = f.du, f.dv
    Fu = bc(sq * gi11) * fu + bc(sq * gi12) * fv
    Fv = bc(sq * gi12) * fu + bc(sq * gi22) * fv
    div = Fu.du.value + Fv.dv.value
    sqv = sq.value.reshape(sq.value.shape + (1,) * extra)
    return -div / sqv


def analyze(x: JetVector, frame: Frame | None = None, metric: MetricSample | None = None) -> tuple:
    """Full pipeline: (metric, frame, GeometrySample)."""
    sig = x.signature
    signs = sig.signs
    if metric is None:
        metric = first_fundamental_form(x)
    if frame is None:
        frame = normal_frame(x, tangent_frame(x, metric))
    B = x.components.shape[0]
    X = x.components
    xu, xv = X.du, X.dv
    second = ((xu.du, xu.dv), (xv.du, xv.dv))
    normals, ns = frame.normals, frame.normal_signs
    nn = len(normals)
    T = frame.to_chart
    eps = frame.tangent_signs

    hc = [[_proj(second[a][b], normals, ns, signs) for b in range(2)] for a in range(2)]

    def to_frame2(c):
        out = [[None, None], [None, None]]
        for i in range(2):
            for j in range(2):
                acc = None
                for a in range(2):
                    for b in range(2):
                        term = _scale(c[a][b], T[a][i] * T[b][j])
                        acc = term if acc is None else acc + term
                out[i][j] = acc
        return out

    hf = to_frame2(hc)
    H = (_scale(hf[0][0], eps[:, 0]) + _scale(hf[1][1], eps[:, 1])) * 0.5
    dH = [_proj(H.d(a), normals, ns, signs) for a in range(2)]
    DH = [sum((dH[a].value * T[a][i].value[:, None] for a in range(2))) for i in range(2)]

    hv = np.array([[hf[i][j].value for j in range(2)] for i in range(2)]).transpose(2, 0, 1, 3)
    hcv = np.array([[hc[a][b].value for b in range(2)] for a in range(2)]).transpose(2, 0, 1, 3)

    def ipv(a, b):
        return np.sum(a * b * signs, axis=-1)

    S_h = np.zeros(B)
    for i in range(2):
        for j in range(2):
            S_h = S_h + eps[:, i] * eps[:, j] * ipv(hv[:, i, j], hv[:, i, j])
    K_ext = 1.0 + eps[:, 0] * eps[:, 1] * (ipv(hv[:, 0, 0], hv[:, 1, 1]) - ipv(hv[:, 0, 1], hv[:, 0, 1]))
    K_int = intrinsic_curvature(metric)
    S = 2.0 * K_int

    # shape operators: (A_r)_{ji} = eps_j <h(e_i, e_j), e_r>
    A = np.zeros((B, nn, 2, 2))
    for r, e in enumerate(normals):
        for i in range(2):
            for j in range(2):
                A[:, r, j, i] = eps[:, j] * ipv(hv[:, i, j], e.value)
    RD_ricci = np.zeros((B, nn, nn))
    for r in range(nn):
        for s in range(nn):
            C = A[:, r] @ A[:, s] - A[:, s] @ A[:, r]
            RD_ricci[:, r, s] = eps[:, 1] * C[:, 1, 0]

    # normal connection forms omega[a][r][s] = <d_a e_r, e_s>
    omega = [[[_ip(normals[r].d(a), normals[s], signs) for s in range(nn)] for r in range(nn)] for a in range(2)]
    Tv = np.array([[T[a][i].value for i in range(2)] for a in range(2)]).transpose(2, 0, 1)
    detT = Tv[:, 0, 0] * Tv[:, 1, 1] - Tv[:, 0, 1] * Tv[:, 1, 0]
    RD = np.zeros((B, nn, nn))
    for r in range(nn):
        for s in range(nn):
            val = omega[1][r][s].d(0).value - omega[0][r][s].d(1).value
            for t_ in range(nn):
                val = val + ns[:, t_] * (
                    omega[1][r][t_].value * omega[0][t_][s].value - omega[0][r][t_].value * omega[1][t_][s].value
                )
            RD[:, r, s] = detT * val

    # Codazzi: (nabla h)(d_a, d_b, d_c) = D_a h_bc - Gamma^d_ab h_dc - Gamma^d_ac h_bd
    G = _christoffel(metric)
    Gv = [[[G[k][i][j].value for j in range(2)] for i in range(2)] for k in range(2)]
    C = np.zeros((B, 2, 2, 2, sig.dimension))
    for a in range(2):
        for b in range(2):
            for c in range(2):
                val = _proj(hc[b][c].d(a), normals, ns, signs).value
                for d in range(2):
                    val = val - Gv[d][a][b][:, None] * hcv[:, d, c] - Gv[d][a][c][:, None] * hcv[:, b, d]
                C[:, a, b, c] = val
    Cf = np.einsum("zai,zbj,zck,zabcn->zijkn", Tv, Tv, Tv, C)
    codazzi = np.zeros(B)
    for i, j, k in itertools.product(range(2), repeat=3):
        codazzi = np.maximum(codazzi, np.max(np.abs(Cf[:, i, j, k] - Cf[:, j, i, k]), axis=-1))

    sample = GeometrySample(
        t=metric.index,
        eps=eps,
        normal_signs=ns,
        h=hv,
        h_coord=hcv,
        H=H.value,
        DH=np.stack(DH, axis=1),
        A=A,
        K_intrinsic=K_int,
        K_extrinsic=K_ext,
        S=S,
        S_h=S_h,
        RD=RD,
        RD_ricci=RD_ricci,
        codazzi=codazzi,
        frame_residual=frame.orthonormality_residual(),
        T=Tv,
    )
    return metric, frame, sample


def second_fundamental_form(x: JetVector, frame: Frame) -> GeometrySample:
    return analyze(x, frame=frame)[2]


def gaussian_curvature(metric: MetricSample, sample: GeometrySample):
    return intrinsic_curvature(metric), sample.K_extrinsic


def normal_curvature(sample: GeometrySample):
    """(R^D from the normal connection, R^D from shape-operator commutators)."""
    return sample.RD, sample.RD_ricci


def h_on(sample: GeometrySample, X, Y) -> np.ndarray:
    """h(X, Y) for chart vectors X = X^a d_a, Y = Y^b d_b (arrays of length 2)."""
    X, Y = np.asarray(X, float), np.asarray(Y, float)
    return np.einsum("a,b,zabn->zn", X, Y, sample.h_coord)


@dataclass(frozen=True)
class Residuals:
    gauss: np.ndarray
    codazzi: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray
    frame: np.ndarray


def equation_residuals(sample: GeometrySample, signature: Signature) -> Residuals:
    signs = signature.signs
    HH = np.sum(sample.H * sample.H * signs, axis=-1)
    nn = sample.RD.shape[1]
    ricci = (
        np.max(np.abs(sample.RD - sample.RD_ricci), axis=(1, 2)) if nn else np.zeros(len(sample.t))
    )
    return Residuals(
        gauss=np.abs(sample.K_intrinsic - sample.K_extrinsic),
        codazzi=sample.codazzi,
        ricci=ricci,
        scalar=np.abs(sample.S - 2.0 - 4.0 * HH + sample.S_h),
        frame=sample.frame_residual,
    )
