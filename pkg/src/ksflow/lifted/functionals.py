"""Monte-Carlo estimation of weighted Fisher functionals on R^6.

Every integral against F is an expectation under exact mixture sampling:

    int g(x) F(x) dx = mass(F) * E_{x ~ F/mass}[ g(x) ].

Sampling is chunked with a fixed chunk size; chunk c of logical stream s
draws from numpy's SeedSequence(seed, spawn_key=(s, c)).  Chunk boundaries
never depend on scheduling, and chunks are reduced in index order, so a given
(seed, n_samples) pair is bit-for-bit reproducible and embarrassingly
parallel in principle.

Independent left/right estimates of an identity use distinct stream ids, so
"agreement within 3 standard errors" compares genuinely independent noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..kernels import PowerLaw
from . import operators as ops
from .frames import commutator_field, vf_divergence, vf_eval, vf_jacobian
from .gaussians import Mixture6

CHUNK_SIZE = 1 << 17

WEIGHT_NAMES = ("ONE", "ALPHA", "SQRT_ALPHA_OVER_R2", "BETA1", "BETA2")


class IntegrabilityError(ValueError):
    """A weight/direction combination is not integrable near the diagonal."""


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n_samples: int
    seed: int

    def agrees_with(self, other: "McEstimate", k: float = 3.0) -> bool:
        return abs(self.value - other.value) <= k * self.combined_stderr(other)

    def combined_stderr(self, other: "McEstimate") -> float:
        return float(np.hypot(self.stderr, other.stderr))


def _chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, chunk)))


def estimate_many(F: Mixture6, integrands: dict, n_samples: int, seed: int,
                  stream: int = 0, order: int = 2) -> dict:
    """Estimate mass * E[g] for every named integrand on shared sample chunks.

    integrands maps name -> fn(x, F_val, grad, hess) returning per-sample
    values.  order=1 skips the Hessian for gradient-only integrands.
    Returns name -> McEstimate.
    """
    mass = F.mass
    n_chunks = (n_samples + CHUNK_SIZE - 1) // CHUNK_SIZE
    sums = {k: 0.0 for k in integrands}
    sq_sums = {k: 0.0 for k in integrands}
    drawn = 0
    for c in range(n_chunks):
        m = min(CHUNK_SIZE, n_samples - drawn)
        rng = _chunk_rng(seed, stream, c)
        x = F.sample(m, rng)
        F_val, grad, hess = F.eval(x, order=order)
        for name, fn in integrands.items():
            vals = fn(x, F_val, grad, hess)
            sums[name] += float(np.sum(vals))
            sq_sums[name] += float(np.sum(vals * vals))
        drawn += m
    out = {}
    for name in integrands:
        mean = sums[name] / n_samples
        var = max(sq_sums[name] / n_samples - mean**2, 0.0)
        out[name] = McEstimate(
            value=mass * mean,
            stderr=mass * float(np.sqrt(var / n_samples)),
            n_samples=n_samples,
            seed=seed,
        )
    return out


def estimate(F: Mixture6, integrand, n_samples: int, seed: int,
             stream: int = 0, order: int = 2) -> McEstimate:
    return estimate_many(F, {"g": integrand}, n_samples, seed, stream, order)["g"]


# ---------------------------------------------------------------------------
# weights and directions
# ---------------------------------------------------------------------------

def weight_values(weight, pot, x: np.ndarray) -> np.ndarray:
    """Evaluate a scalar weight at x.

    `weight` is ONE, ALPHA, SQRT_ALPHA_OVER_R2, BETA1, BETA2, a pair
    ("GEN", p, q) meaning alpha^p |z|^q, or a callable of (pot, x).
    """
    if callable(weight):
        return weight(pot, x)
    if weight == "ONE":
        return np.ones(np.atleast_2d(x).shape[0])
    r, a, ap, _ = ops.alpha_bundle(pot, x)
    if weight == "ALPHA":
        return a
    if weight == "SQRT_ALPHA_OVER_R2":
        return np.sqrt(a) / r**2
    if weight == "BETA1":
        return ops.beta1(pot, x)
    if weight == "BETA2":
        return ops.beta2(pot, x)
    if isinstance(weight, tuple) and weight[0] == "GEN":
        _, p, q = weight
        return a**p * r**q
    raise ValueError(f"unknown weight {weight!r}")


def _weight_diagonal_exponent(weight, gamma: float) -> float:
    if weight == "ONE" or callable(weight):
        return 0.0
    if weight == "ALPHA":
        return gamma
    if weight == "SQRT_ALPHA_OVER_R2":
        return 0.5 * gamma - 2.0
    if weight in ("BETA1", "BETA2"):
        return 0.5 * gamma
    if isinstance(weight, tuple) and weight[0] == "GEN":
        _, p, q = weight
        return gamma * p + q
    raise ValueError(f"unknown weight {weight!r}")


def _direction_compensation(direction) -> float:
    """Extra |z| powers the squared directional derivative supplies."""
    if isinstance(direction, str) and direction in ("B0", "B1", "B2", "B3", "L0"):
        return 2.0
    return 0.0


def check_integrability(weight, direction, pot):
    """Near-diagonal exponent must exceed -3 (the z-marginal has an r^2 density).

    Raises IntegrabilityError naming the violated condition; soft potentials
    are always admissible.
    """
    if not isinstance(pot, PowerLaw):
        return
    e = _weight_diagonal_exponent(weight, pot.gamma) + _direction_compensation(direction)
    if e <= -3.0:
        raise IntegrabilityError(
            f"weight {weight!r} with direction {direction!r} scales like "
            f"|v-w|^{e:g} near the diagonal; integrability requires the "
            f"exponent to exceed -3 (gamma = {pot.gamma:g})"
        )



def _is_full(direction) -> bool:
    return isinstance(direction, str) and direction == "FULL"

def _direction_values(direction, pot, x: np.ndarray) -> np.ndarray:
    if isinstance(direction, str) and direction == "L0":
        return ops.sqrt_alpha_b0(pot, x)
    return vf_eval(direction, x)


def integrand_fisher(weight="ONE", direction="FULL", pot=None):
    """Integrand of I_e^beta(F) = int beta |e . grad log F|^2 F."""

    def g(x, F_val, grad, hess):
        beta = weight_values(weight, pot, x) if weight != "ONE" else 1.0
        if _is_full(direction):
            s = np.einsum("ni,ni->n", grad, grad) / F_val**2
        else:
            e = _direction_values(direction, pot, x)
            s = np.einsum("ni,ni->n", e, grad) ** 2 / F_val**2
        return beta * s

    return g


def fisher_functional(F: Mixture6, weight="ONE", direction="FULL",
                      n_samples: int = 1 << 20, seed: int = 0, pot=None,
                      stream: int = 0) -> McEstimate:
    """I_e^beta(F) = int beta |e . grad log F|^2 F  (FULL: |grad log F|^2 F)."""
    if not _is_full(direction):
        check_integrability(weight, direction, pot if pot is not None else PowerLaw(0.0))
    if weight != "ONE" and pot is None:
        raise ValueError("weighted functionals need a potential")
    return estimate(F, integrand_fisher(weight, direction, pot), n_samples, seed,
                    stream, order=1)


# ---------------------------------------------------------------------------
# first-variation pairings
# ---------------------------------------------------------------------------

def _transport_field(b, pot, x):
    """(values, jacobian) for b = frame name, constant vector, or "L0"."""
    if isinstance(b, str) and b == "L0":
        return ops.sqrt_alpha_b0(pot, x), ops.sqrt_alpha_b0_jacobian(pot, x)
    return vf_eval(b, x), vf_jacobian(b, x)


def integrand_pair(b, weight="ONE", direction="FULL", pot=None):
    """Integrand of < (I_e^beta)'(F), L_b(F) > (per unit F):

        [2 beta (e.grad F)(e.grad(b.grad F))/F - beta (e.grad F)^2 (b.grad F)/F^2] / F

    or the full-gradient version when direction is FULL.
    """

    def g(x, F_val, grad, hess):
        beta = weight_values(weight, pot, x) if weight != "ONE" else 1.0
        vb, Jb = _transport_field(b, pot, x)
        # grad(b . grad F) = Db^T grad F + Hess F b
        gbF = np.einsum("nji,nj->ni", Jb, grad) + np.einsum("nij,nj->ni", hess, vb)
        bF = np.einsum("ni,ni->n", vb, grad)
        if _is_full(direction):
            first = 2.0 * np.einsum("ni,ni->n", grad, gbF) / F_val
            second = np.einsum("ni,ni->n", grad, grad) * bF / F_val**2
        else:
            e = _direction_values(direction, pot, x)
            eF = np.einsum("ni,ni->n", e, grad)
            first = 2.0 * eF * np.einsum("ni,ni->n", e, gbF) / F_val
            second = eF**2 * bF / F_val**2
        return beta * (first - second) / F_val

    return g


def pair_first_variation(F: Mixture6, b, weight="ONE", direction="FULL",
                         n_samples: int = 1 << 20, seed: int = 0, pot=None,
                         stream: int = 0) -> McEstimate:
    """< (I_e^beta)'(F), L_b(F) > from the explicit first-variation integrand.

    No perturbed functional and no finite-difference epsilon anywhere.
    """
    if not _is_full(direction):
        check_integrability(weight, direction, pot if pot is not None else PowerLaw(0.0))
    return estimate(F, integrand_pair(b, weight, direction, pot), n_samples, seed, stream)


def integrand_operator_pairing(op_fn):
    """Integrand of < I'(F), G > = int (|grad log F|^2 - 2 Lap F/F) G dx.

    op_fn(x, F_val, grad, hess) must return pointwise values of the operator
    applied to F (e.g. Q_KS(F)(x)).
    """

    def g(x, F_val, grad, hess):
        psi = ops.first_variation_density(F_val, grad, hess)
        return psi * op_fn(x, F_val, grad, hess) / F_val

    return g


def pair_with_operator(F: Mixture6, op_fn, n_samples: int = 1 << 20,
                       seed: int = 0, stream: int = 0) -> McEstimate:
    return estimate(F, integrand_operator_pairing(op_fn), n_samples, seed, stream)


# ---------------------------------------------------------------------------
# identity right-hand sides (Fisher commutation forms)
# ---------------------------------------------------------------------------

def integrand_commutation_rhs(e, b):
    """Integrand of int [2 (e.u)([e,b].u) - div(b)(e.u)^2] F, u = grad log F.

    The unweighted directional commutation identity; e and b are frame fields
    or constant vectors with analytic commutator and divergence.
    """

    def g(x, F_val, grad, hess):
        u = grad / F_val[:, None]
        ve = vf_eval(e, x)
        comm = commutator_field(e, b, x)
        div_b = vf_divergence(b, x)
        eu = np.einsum("ni,ni->n", ve, u)
        cu = np.einsum("ni,ni->n", comm, u)
        return 2.0 * eu * cu - div_b * eu**2

    return g


def commutation_rhs(F: Mixture6, e, b, n_samples: int = 1 << 20, seed: int = 0,
                    stream: int = 0) -> McEstimate:
    return estimate(F, integrand_commutation_rhs(e, b), n_samples, seed, stream, order=1)


def integrand_full_gradient_rhs(b):
    """Integrand of int [2 <Db u, u> - div(b) |u|^2] F for a frame field b."""

    def g(x, F_val, grad, hess):
        u = grad / F_val[:, None]
        Jb = vf_jacobian(b, x)
        div_b = vf_divergence(b, x)
        quad = np.einsum("ni,nij,nj->n", u, Jb, u)
        return 2.0 * quad - div_b * np.einsum("ni,ni->n", u, u)

    return g


def full_gradient_rhs(F: Mixture6, b, n_samples: int = 1 << 20, seed: int = 0,
                      stream: int = 0) -> McEstimate:
    return estimate(F, integrand_full_gradient_rhs(b), n_samples, seed, stream, order=1)
