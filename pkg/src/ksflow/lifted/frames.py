"""Vector-field frames on R^6 for the doubled-variable collision calculus.

With z = v - w, the Landau directions are b_k(z) = e_k x z lifted as
bt_k = (b_k, -b_k); they span the tangent space of the level sets of |z|.
The extra direction of the isotropic model is bt_0 = (z, -z), normal to those
level sets, with unit version n = bt_0 / (sqrt(2) |z|).  The constant fields
nu_i = e_i + e_{3+i} diagonalize the first-order Maxwell computation.

Key algebra, all verified numerically by `frame_identities`:

    sum_k b_k (x) b_k = |z|^2 Id_3 - z (x) z          (projection onto z-perp)
    |z|^2 Id_3       = a_ij(z) + b_0 (x) b_0
    D bt_0           = [[Id, -Id], [-Id, Id]],   div bt_0 = 6
    sum_{k=0..3} bt_k (x) bt_k = |z|^2 D bt_0
"""

from __future__ import annotations

import numpy as np

from .gaussians import Mixture6


class FrameError(ValueError):
    pass


def _cross_matrix(k: int) -> np.ndarray:
    """C with C z = e_k x z."""
    e = np.zeros(3)
    e[k] = 1.0
    C = np.array([
        [0.0, -e[2], e[1]],
        [e[2], 0.0, -e[0]],
        [-e[1], e[0], 0.0],
    ])
    return C


_CROSS = [_cross_matrix(k) for k in range(3)]

FRAME_NAMES = ("B0", "B1", "B2", "B3", "N", "NU1", "NU2", "NU3")


def _z(x: np.ndarray) -> np.ndarray:
    return x[:, :3] - x[:, 3:]


def vf_eval(name, x: np.ndarray) -> np.ndarray:
    """Evaluate a frame field at points x of shape (n, 6).

    `name` is one of FRAME_NAMES or a constant vector of length 6.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    if isinstance(name, (np.ndarray, list, tuple)):
        e = np.asarray(name, dtype=float).reshape(6)
        return np.broadcast_to(e, (n, 6)).copy()
    z = _z(x)
    if name == "B0":
        return np.concatenate([z, -z], axis=1)
    if name in ("B1", "B2", "B3"):
        b = z @ _CROSS[int(name[1]) - 1].T
        return np.concatenate([b, -b], axis=1)
    if name == "N":
        r = np.linalg.norm(z, axis=1, keepdims=True)
        if np.any(r == 0.0):
            raise FrameError("N is undefined on the diagonal v = w")
        return np.concatenate([z, -z], axis=1) / (np.sqrt(2.0) * r)
    if name in ("NU1", "NU2", "NU3"):
        i = int(name[2]) - 1
        e = np.zeros(6)
        e[i] = 1.0
        e[i + 3] = 1.0
        return np.broadcast_to(e, (n, 6)).copy()
    raise FrameError(f"unknown frame field {name!r}")


def vf_jacobian(name, x: np.ndarray) -> np.ndarray:
    """Analytic Jacobian (n, 6, 6) of a frame field; D(const) = 0."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    if isinstance(name, (np.ndarray, list, tuple)) or name.startswith("NU"):
        return np.zeros((n, 6, 6))
    if name == "B0":
        J = np.zeros((6, 6))
        J[:3, :3] = np.eye(3)
        J[:3, 3:] = -np.eye(3)
        J[3:, :3] = -np.eye(3)
        J[3:, 3:] = np.eye(3)
        return np.broadcast_to(J, (n, 6, 6)).copy()
    if name in ("B1", "B2", "B3"):
        C = _CROSS[int(name[1]) - 1]
        J = np.zeros((6, 6))
        J[:3, :3] = C
        J[:3, 3:] = -C
        J[3:, :3] = -C
        J[3:, 3:] = C
        return np.broadcast_to(J, (n, 6, 6)).copy()
    if name == "N":
        z = _z(x)
        r = np.linalg.norm(z, axis=1)
        b0 = np.concatenate([z, -z], axis=1)
        nvec = b0 / (np.sqrt(2.0) * r[:, None])
        Jb0 = vf_jacobian("B0", x)
        return (
            Jb0 / (np.sqrt(2.0) * r[:, None, None])
            - np.einsum("ni,nj->nij", b0, nvec) / (r**2)[:, None, None]
        )
    raise FrameError(f"unknown frame field {name!r}")


def vf_divergence(name, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    if isinstance(name, (np.ndarray, list, tuple)) or name.startswith(("NU", "B1", "B2", "B3")):
        return np.zeros(n)
    if name == "B0":
        return np.full(n, 6.0)
    if name == "N":
        r = np.linalg.norm(_z(x), axis=1)
        return 2.0 * np.sqrt(2.0) / r
    raise FrameError(f"unknown frame field {name!r}")


def commutator_field(a, b, x: np.ndarray) -> np.ndarray:
    """[a, b] = (Db) a - (Da) b from the analytic Jacobians."""
    va = vf_eval(a, x)
    vb = vf_eval(b, x)
    Ja = vf_jacobian(a, x)
    Jb = vf_jacobian(b, x)
    return np.einsum("nij,nj->ni", Jb, va) - np.einsum("nij,nj->ni", Ja, vb)


def commutator_apply(a, b, F: Mixture6, x: np.ndarray) -> np.ndarray:
    """[a, b] . grad F = a.grad(b.grad F) - b.grad(a.grad F), all analytic."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    _, grad, hess = F.eval(x)
    va = vf_eval(a, x)
    vb = vf_eval(b, x)
    Ja = vf_jacobian(a, x)
    Jb = vf_jacobian(b, x)
    # grad(b . grad F) = Db^T grad F + Hess F b
    gb = np.einsum("nji,nj->ni", Jb, grad) + np.einsum("nij,nj->ni", hess, vb)
    ga = np.einsum("nji,nj->ni", Ja, grad) + np.einsum("nij,nj->ni", hess, va)
    return np.einsum("ni,ni->n", va, gb) - np.einsum("ni,ni->n", vb, ga)


def a_matrix(z: np.ndarray) -> np.ndarray:
    """a_ij(z) = |z|^2 delta_ij - z_i z_j, shape (n, 3, 3)."""
    z = np.atleast_2d(z)
    r2 = np.sum(z**2, axis=1)
    return r2[:, None, None] * np.eye(3) - np.einsum("ni,nj->nij", z, z)


def frame_identities(x: np.ndarray) -> dict:
    """Residuals of the pointwise frame algebra at x; all should be ~1e-12."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z = _z(x)
    r2 = np.sum(z**2, axis=1)
    bks = [vf_eval(f"B{k}", x)[:, :3] for k in (1, 2, 3)]
    sum_outer = sum(np.einsum("ni,nj->nij", b, b) for b in bks)
    aij = a_matrix(z)
    scale = np.maximum(r2, 1e-300)[:, None, None]
    res_projection = np.max(np.abs(sum_outer - aij) / scale)
    res_resolution = np.max(
        np.abs(aij + np.einsum("ni,nj->nij", z, z) - r2[:, None, None] * np.eye(3))
        / scale
    )
    Jb0 = vf_jacobian("B0", x)
    res_div = np.max(np.abs(np.einsum("nii->n", Jb0) - 6.0))
    block = np.zeros((6, 6))
    block[:3, :3] = np.eye(3)
    block[3:, 3:] = np.eye(3)
    block[:3, 3:] = -np.eye(3)
    block[3:, :3] = -np.eye(3)
    res_jac = np.max(np.abs(Jb0 - block))
    nvec = vf_eval("N", x)
    res_unit = np.max(np.abs(np.sum(nvec**2, axis=1) - 1.0))
    res_tangency = max(
        np.max(np.abs(np.einsum("ni,ni->n", vf_eval(f"B{k}", x), vf_eval("B0", x))))
        / np.maximum(r2.max(), 1e-300)
        for k in (1, 2, 3)
    )
    return {
        "tangent_projection": float(res_projection),
        "normal_resolution": float(res_resolution),
        "div_b0": float(res_div),
        "jacobian_b0_blocks": float(res_jac),
        "unit_normal": float(res_unit),
        "tangency": float(res_tangency),
    }


# ---------------------------------------------------------------------------
# flows
# ---------------------------------------------------------------------------

def flow(name, x0, t: float, dt: float = 1e-3):
    """RK4 integration of xdot = field(x) from x0 over [0, t].

    Returns (x(t), invariants) where the invariants dict reports the drift of
    the midpoint v+w, the norm |v|^2+|w|^2 and the separation |v-w| over the
    trajectory (conserved exactly by the tangent fields B1..B3; B0 preserves
    only the midpoint and stretches the separation like e^{2t}).
    """
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    if t < 0 or dt <= 0:
        raise FrameError("flow needs t >= 0 and dt > 0")
    n_steps = int(round(t / dt)) if t > 0 else 0
    if n_steps and abs(n_steps * dt - t) > 1e-12 * max(t, 1.0):
        raise FrameError("t must be an integer multiple of dt")

    def rhs(y):
        return vf_eval(name, y)

    def invariants(y):
        v, w = y[:, :3], y[:, 3:]
        return (
            v + w,
            np.sum(v**2 + w**2, axis=1),
            np.linalg.norm(v - w, axis=1),
        )

    mid0, norm0, sep0 = invariants(x)
    for _ in range(n_steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    mid1, norm1, sep1 = invariants(x)
    inv = {
        "midpoint_drift": float(np.max(np.abs(mid1 - mid0))),
        "norm_drift": float(np.max(np.abs(norm1 - norm0))),
        "separation_drift": float(np.max(np.abs(sep1 - sep0))),
        "separation_ratio_sq": float(np.max((sep1 / np.maximum(sep0, 1e-300)) ** 2)),
    }
    return x, inv
