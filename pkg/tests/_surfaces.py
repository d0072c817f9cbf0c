"""Shared surface builders for the test suite."""

import numpy as np

from psgauss import dsl


def normalized(y, index=0, name="generic", u_range=(-0.6, 0.6), v_range=(-0.6, 0.6), surface_index=0):
    """Spec of y / sqrt(<y, y>) for component expressions ``y`` (strings)."""
    n = len(y)
    signs = ["+"] * (n - index) + ["-"] * index
    q = " ".join(f"{s} ({c})^2" for s, c in zip(signs, y)).lstrip("+ ")
    lines = [
        f"dim = {n}",
        f"index = {index}",
        f"surface_index = {surface_index}",
        f"domain = u in [{u_range[0]}, {u_range[1]}], v in [{v_range[0]}, {v_range[1]}]",
    ]
    lines += [f"x{i} = ({c}) / sqrt({q})" for i, c in enumerate(y, 1)]
    return dsl.parse("\n".join(lines) + "\n", name)


# a Riemannian surface in S^4 with H != 0 and non-flat normal bundle
GENERIC_S4 = normalized(
    ["1 + 0.3*u*v", "u + 0.2*v^2", "v - 0.1*u^3", "0.4*u^2 + 0.1*v", "0.3*u*v^2 - 0.5*v^2"]
)

# a Lorentzian surface in S^4_1 (E^5_1, last coordinate timelike)
GENERIC_S41 = normalized(
    ["2 + 0.3*u*v", "u + 0.2*v^2", "0.2*u^2 - 0.1*v^3", "0.4*u*v + 0.3*v^2", "v + 0.1*u^2"],
    index=1,
    surface_index=1,
)

# a spacelike surface in S^4_2 (E^5_2)
GENERIC_S42 = normalized(
    ["2 + 0.2*u*v", "u + 0.1*v^2", "v - 0.2*u^2", "0.3*u^2 + 0.2*v^2", "0.4*u*v + 0.1*u^3"],
    index=2,
)


def grid(spec, n=7):
    return dsl.make_grid(spec.u_range, spec.v_range, n, n)


def jets_at(spec, n=7):
    u, v = grid(spec, n)
    return dsl.evaluate(spec, u, v)


__all__ = ["normalized", "GENERIC_S4", "GENERIC_S41", "GENERIC_S42", "grid", "jets_at", "np"]
