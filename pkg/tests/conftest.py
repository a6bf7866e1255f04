import numpy as np
import pytest

from dcpm import models
from dcpm.mesh import load_mesh

# Unit tetrahedron: smallest closed oriented simplicial surface (genus 0).
TETRA_TEXT = """\
DCPM 1
v 4
e 0 0 1 1.0
e 1 0 2 1.0
e 2 0 3 1.0
e 3 1 2 1.0
e 4 1 3 1.0
e 5 2 3 1.0
f 0 +0 +3 -1
f 1 +1 +5 -2
f 2 +2 -4 -0
f 3 +4 -5 -3
"""

# Two triangles glued along all three edges ("pillow", genus 0): handy for
# exercising per-face geometry on a closed mesh with arbitrary lengths.
PILLOW_TEXT = """\
DCPM 1
v 3
e 0 0 1 {l0}
e 1 1 2 {l1}
e 2 2 0 {l2}
f 0 +0 +1 +2
f 1 -0 -2 -1
"""


@pytest.fixture
def tetra():
    return load_mesh(TETRA_TEXT)


def make_pillow(l0, l1, l2):
    return load_mesh(PILLOW_TEXT.format(l0=repr(l0), l1=repr(l1), l2=repr(l2)))


@pytest.fixture(scope="session")
def octagon_levels():
    """Octagon fixture refined to levels 0..3, built once per session."""
    out = [models.gen_octagon_genus2()]
    for _ in range(3):
        out.append(models.refine_midpoint(out[-1]))
    return out


@pytest.fixture(scope="session")
def octagon0(octagon_levels):
    return octagon_levels[0]


@pytest.fixture(scope="session")
def octagon1(octagon_levels):
    return octagon_levels[1]


@pytest.fixture(scope="session")
def octagon2(octagon_levels):
    return octagon_levels[2]


def random_feasible_instance(m, rng, kappa_range=(-2.0, -0.5), u_scale=0.1):
    """Random per-face curvature and small conformal factor on a fixture."""
    kappa = rng.uniform(*kappa_range, m.mesh.face_count)
    u = rng.uniform(-u_scale, u_scale, m.mesh.vertex_count)
    return kappa, u


def fd_jacobian(mesh, kappa, u, lengths, h=1e-6):
    """Central finite differences of the discrete curvature map."""
    from dcpm.geometry import discrete_curvature

    n = mesh.vertex_count
    J = np.empty((n, n))
    for j in range(n):
        up, um = u.copy(), u.copy()
        up[j] += h
        um[j] -= h
        J[:, j] = (discrete_curvature(mesh, kappa, up, lengths)
                   - discrete_curvature(mesh, kappa, um, lengths)) / (2.0 * h)
    return J
