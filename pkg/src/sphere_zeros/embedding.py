"""Numeric checks of the joint eigenbasis map f = (f_1, ..., f_N) into R^N.

The map sends the sphere onto a round sphere of radius R = sqrt(N/vol(M)),
is a metric dilation by C = lam*N / (n*vol(M)) (so its differential has
Gram matrix C*I in any orthonormal tangent frame), and covers its image
with some finite degree d.  This module measures all of these numerically:
R and C from pointwise identities, d by collision probing, and the image
volume by integrating sqrt(det Gram) over a geodesic mesh and dividing by
the multiplicity d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .harmonics import (
    HarmonicBasis,
    SphereInputError,
    as_sphere_point,
    eval_basis_many,
    eval_gradient,
    eval_gradient_many,
    random_sphere_points,
)
from .icosphere import icosphere, spherical_face_areas

COLLISION_FACTOR = 1e-8       # image points closer than factor*R count as equal
MIN_SEPARATION = 1e-3         # geodesic distance below which pairs are ignored


class UnexpectedFiberError(RuntimeError):
    """Distinct non-identified source points mapped to the same image point."""


@dataclass(frozen=True)
class EmbeddingReport:
    """Measured radius, dilation, covering degree, and image volume."""

    sphere_dim: int
    degree: int
    radius: float                     # sqrt of the measured pointwise sum of squares
    dilation: float                   # lam * N / (n * vol M)
    covering_degree: int
    numeric_integral: float           # integral of sqrt(det Gram) over the source
    predicted_image_volume: float     # (1/d) * dilation^(n/2) * vol M
    max_gram_residual: float          # worst |Gram - C*I| entry over probe points
    antipodal_identified: bool        # whether f(-x) = f(x) held at the probes

    @property
    def numeric_image_volume(self) -> float:
        """Source integral divided by the covering multiplicity."""
        return self.numeric_integral / self.covering_degree


def radius_check(basis: HarmonicBasis, num_points: int, rng: np.random.Generator) -> float:
    """Max |sum_i f_i(x)^2 - N/vol(M)| over random points."""
    if num_points < 1:
        raise SphereInputError("num_points must be >= 1")
    pts = random_sphere_points(basis.sphere_dim, num_points, rng)
    values = eval_basis_many(basis, pts)
    return float(np.max(np.abs(np.einsum("pk,pk->p", values, values) - basis.unsold_constant)))


def _tangent_frame_at(point: np.ndarray) -> np.ndarray:
    if point.shape[0] == 2:
        return np.array([[-point[1], point[0]]])
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(point)))] = 1.0
    e1 = np.cross(point, helper)
    e1 /= np.linalg.norm(e1)
    return np.stack([e1, np.cross(point, e1)])


def dilation_check(basis: HarmonicBasis, point) -> float:
    """Max |Gram - C*I| entry of the differential at one point.

    The differential rows are the tangential gradients expressed in an
    orthonormal frame; the trace of the Gram matrix equals the pointwise
    gradient sum, tying this check to the radius identity.
    """
    p = as_sphere_point(point, basis.sphere_dim)
    frame = _tangent_frame_at(p)
    grads = eval_gradient(basis, p)                   # (N, n+1)
    differential = grads @ frame.T                    # (N, n)
    gram = differential.T @ differential
    return float(np.max(np.abs(gram - basis.dilation_constant * np.eye(basis.sphere_dim))))


def covering_degree(basis: HarmonicBasis, probes: int, rng: np.random.Generator) -> int:
    """Covering multiplicity of the joint map onto its image, by probing.

    On S2 the fiber over any image point is {x} or {x, -x}; the probe tests
    f(-x) = f(x) and scans random far-apart pairs for other collisions,
    which would flag a bug.  On S1 the map wraps the circle m times, so the
    multiplicity is recovered by counting the collision angles of
    t -> |f(t0 + t) - f(t0)| over a full revolution at each probe.
    """
    if probes < 1:
        raise SphereInputError("probes must be >= 1")
    radius = basis.embedding_radius
    tol = COLLISION_FACTOR * radius
    if basis.sphere_dim == 2:
        pts = random_sphere_points(2, probes, rng)
        values = eval_basis_many(basis, pts)
        mirrored = eval_basis_many(basis, -pts)
        antipodal = bool(np.max(np.linalg.norm(values - mirrored, axis=1)) <= tol)
        degree = 2 if antipodal else 1
        # Collision scan over random far-apart, non-identified pairs.
        x = random_sphere_points(2, probes, rng)
        y = random_sphere_points(2, probes, rng)
        sep = np.arccos(np.clip(np.einsum("pi,pi->p", x, y), -1.0, 1.0))
        ok = sep > MIN_SEPARATION
        if antipodal:
            anti_sep = np.arccos(np.clip(-np.einsum("pi,pi->p", x, y), -1.0, 1.0))
            ok &= anti_sep > MIN_SEPARATION
        if np.any(ok):
            dist = np.linalg.norm(
                eval_basis_many(basis, x[ok]) - eval_basis_many(basis, y[ok]), axis=1
            )
            if np.any(dist < tol):
                raise UnexpectedFiberError(
                    "collision between non-identified points; covering degree "
                    "on S2 must be 1 or 2"
                )
        return degree

    # S1: count collision angles along one revolution from each probe.  One
    # probe already scans the whole circle; a handful guards consistency.
    counts = set()
    for _ in range(min(probes, 6)):
        t0 = rng.uniform(0.0, 2.0 * math.pi)
        base = np.array([math.cos(t0), math.sin(t0)])
        f0 = eval_basis_many(basis, base[None, :])[0]
        n_scan = 512 * basis.degree
        t = 2.0 * math.pi * (np.arange(1, n_scan) / n_scan)
        pts = np.stack([np.cos(t0 + t), np.sin(t0 + t)], axis=1)
        gap = np.linalg.norm(eval_basis_many(basis, pts) - f0[None, :], axis=1)
        # Local minima of the gap, refined by ternary search.
        local = np.nonzero((gap[1:-1] < gap[:-2]) & (gap[1:-1] < gap[2:]))[0] + 1
        hits = 0
        for j in local:
            lo, hi = t[j - 1], t[j + 1]
            for _ in range(200):
                third = (hi - lo) / 3.0
                a, b = lo + third, hi - third
                ga = _gap_at(basis, t0, a, f0)
                gb = _gap_at(basis, t0, b, f0)
                if ga < gb:
                    hi = b
                else:
                    lo = a
                if hi - lo < 1e-14:
                    break
            if _gap_at(basis, t0, 0.5 * (lo + hi), f0) < tol:
                hits += 1
        counts.add(hits + 1)          # the trivial collision at t = 0
    if len(counts) != 1:
        raise UnexpectedFiberError(f"inconsistent collision counts across probes: {counts}")
    return counts.pop()


def _gap_at(basis: HarmonicBasis, t0: float, t: float, f0: np.ndarray) -> float:
    p = np.array([math.cos(t0 + t), math.sin(t0 + t)])
    return float(np.linalg.norm(eval_basis_many(basis, p[None, :])[0] - f0))


def image_volume(
    basis: HarmonicBasis,
    quadrature_depth: int = 4,
    probes: int = 64,
    seed: int = 988,
) -> EmbeddingReport:
    """Full embedding report with the image volume measured by quadrature.

    The integrand sqrt(det Gram) is evaluated from the numeric differential
    at every quadrature node (face centroids of a geodesic mesh on S2, a
    uniform grid on S1) and integrated against exact cell measures.  The
    default depth reproduces the degree-1 reference value 3 to well below
    1e-4; the integrand is constant for an exact eigenbasis, so accuracy is
    limited only by the pointwise identity residuals.
    """
    rng = np.random.default_rng([seed, basis.sphere_dim, basis.degree])
    degree_count = covering_degree(basis, probes, rng)
    n = basis.sphere_dim
    target = basis.dilation_constant

    if n == 2:
        mesh = icosphere(quadrature_depth)
        nodes = mesh.centroids
        weights = spherical_face_areas(mesh)
    else:
        n_nodes = max(512, 64 * basis.degree)
        t = 2.0 * math.pi * (np.arange(n_nodes) + 0.5) / n_nodes
        nodes = np.stack([np.cos(t), np.sin(t)], axis=1)
        weights = np.full(n_nodes, 2.0 * math.pi / n_nodes)

    grads = eval_gradient_many(basis, nodes)          # (P, N, n+1)
    if n == 2:
        helper = np.zeros_like(nodes)
        helper[np.arange(nodes.shape[0]), np.argmin(np.abs(nodes), axis=1)] = 1.0
        e1 = np.cross(nodes, helper)
        e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
        e2 = np.cross(nodes, e1)
        d1 = np.einsum("pkj,pj->pk", grads, e1)
        d2 = np.einsum("pkj,pj->pk", grads, e2)
        g11 = np.einsum("pk,pk->p", d1, d1)
        g22 = np.einsum("pk,pk->p", d2, d2)
        g12 = np.einsum("pk,pk->p", d1, d2)
        det = g11 * g22 - g12**2
        gram_residual = float(
            max(
                np.max(np.abs(g11 - target)),
                np.max(np.abs(g22 - target)),
                np.max(np.abs(g12)),
            )
        )
    else:
        tangent = np.stack([-nodes[:, 1], nodes[:, 0]], axis=1)
        d1 = np.einsum("pkj,pj->pk", grads, tangent)
        det = np.einsum("pk,pk->p", d1, d1)
        gram_residual = float(np.max(np.abs(det - target)))

    numeric_integral = float(np.sum(weights * np.sqrt(np.clip(det, 0.0, None))))
    values = eval_basis_many(basis, nodes)
    radius = float(math.sqrt(np.mean(np.einsum("pk,pk->p", values, values))))
    mirrored = eval_basis_many(basis, -nodes[: min(64, nodes.shape[0])])
    antipodal = bool(
        np.max(np.linalg.norm(values[: mirrored.shape[0]] - mirrored, axis=1))
        <= COLLISION_FACTOR * basis.embedding_radius
    )
    predicted = target ** (n / 2.0) * basis.manifold_volume / degree_count
    return EmbeddingReport(
        sphere_dim=n,
        degree=basis.degree,
        radius=radius,
        dilation=target,
        covering_degree=degree_count,
        numeric_integral=numeric_integral,
        predicted_image_volume=predicted,
        max_gram_residual=gram_residual,
        antipodal_identified=antipodal,
    )
