"""Exact derivative of the discrete curvature map: dK/du = D - Delta_eta.

Edge weights and diagonal are assembled per face from half-angle cotangents
and the lambda factors; the result is the true Jacobian of
:func:`dcpm.geometry.discrete_curvature` (checked by finite differences in
the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import corner_angles, scale_lengths
from .mesh import SurfaceMesh

COT_SINGULARITY_TOL = 1e-12


class CotangentSingularityError(Exception):
    """A half-angle combination reached 0 or pi; face nearly degenerate."""


def tilde_theta(angles: np.ndarray) -> np.ndarray:
    """Half-angle combinations: slot s gets (pi + theta_s - theta_j - theta_k)/2."""
    angles = np.asarray(angles, dtype=float)
    total = angles.sum(axis=-1, keepdims=True)
    return 0.5 * (np.pi + 2.0 * angles - total)


def lambda_factor(kappa, scaled_length):
    """kappa^2 l^2 / (kappa^2 l^2 + 4); equals tanh^2(H/2) of the model length."""
    t = (np.asarray(kappa, dtype=float) * np.asarray(scaled_length, dtype=float)) ** 2
    return t / (t + 4.0)


@dataclass
class JacobianParts:
    """Pieces of dK/du = D - Delta_eta for one configuration.

    ``eta`` is per edge (summed over the two incident faces), ``diag`` per
    vertex, ``corner_tilde`` the (F, 3) half-angle combinations by corner
    slot, and ``lam`` the (F, 3) lambda factors by *edge* slot.
    """

    mesh: SurfaceMesh
    eta: np.ndarray
    diag: np.ndarray
    corner_tilde: np.ndarray
    lam: np.ndarray

    def laplacian(self) -> sp.csr_matrix:
        from .calculus import laplacian_matrix
        return laplacian_matrix(self.mesh, self.eta)

    def matrix(self) -> np.ndarray:
        """Dense Jacobian D - Delta_eta."""
        J = -self.laplacian().toarray()
        J[np.diag_indices_from(J)] += self.diag
        return J


def assemble_jacobian(mesh: SurfaceMesh, kappa: np.ndarray, u: np.ndarray,
                      lengths: np.ndarray) -> JacobianParts:
    """Assemble eta(u) and D(u) from the current configuration.

    Per face and edge slot s (opposite corner s+2), the face contributes
    cot(tilde_theta)*(1-lambda)/2 to the edge weight and cot(tilde_theta)*lambda
    to the diagonal at each endpoint of the edge.  Accumulation runs in
    ascending face id order, so assembly is deterministic.  For a loop edge
    both endpoint contributions land on the same diagonal entry, which is the
    correct specialization of the derivative.
    """
    scaled = scale_lengths(mesh, u, lengths)
    angles = corner_angles(mesh, kappa, scaled)
    tilde = tilde_theta(angles)
    if (tilde < COT_SINGULARITY_TOL).any() or (np.pi - tilde < COT_SINGULARITY_TOL).any():
        f = int(np.nonzero(((tilde < COT_SINGULARITY_TOL)
                            | (np.pi - tilde < COT_SINGULARITY_TOL)).any(axis=1))[0][0])
        raise CotangentSingularityError(
            f"half angle at face {mesh.face_ids[f]} within "
            f"{COT_SINGULARITY_TOL} of 0 or pi")

    lam = lambda_factor(kappa[:, None], scaled[mesh.face_edges])
    # cotangent opposite to edge slot s is at corner slot s+2
    cot_opp = np.roll(np.cos(tilde) / np.sin(tilde), 1, axis=1)

    eta = np.zeros(mesh.edge_count)
    np.add.at(eta, mesh.face_edges.ravel(), (0.5 * cot_opp * (1.0 - lam)).ravel())

    diag = np.zeros(mesh.vertex_count)
    dcontrib = (cot_opp * lam).ravel()
    edge_ends = mesh.edges[mesh.face_edges.ravel()]
    np.add.at(diag, edge_ends[:, 0], dcontrib)
    np.add.at(diag, edge_ends[:, 1], dcontrib)

    return JacobianParts(mesh=mesh, eta=eta, diag=diag,
                         corner_tilde=tilde, lam=lam)
