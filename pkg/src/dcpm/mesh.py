"""Closed oriented triangulated surfaces, stored as delta-complexes.

A mesh is purely combinatorial: integer vertex ids, an explicit edge list
(multi-edges and loops allowed), and oriented faces given as three directed
edges chaining head-to-tail.  No coordinates are ever stored; all geometry
lives in a separate per-edge length vector.

File format (line oriented, '#' starts a comment)::

    DCPM 1
    v <vertex_count>
    e <edge_id> <vertex_a> <vertex_b> <length>
    f <face_id> <±edge_id> <±edge_id> <±edge_id>

Signed edge ids in ``f`` lines give the traversal direction: ``+`` walks the
edge a→b, ``-`` walks it b→a.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAGIC = "DCPM 1"


class MeshError(Exception):
    """Invalid mesh file or mesh combinatorics."""


@dataclass
class SurfaceMesh:
    """Combinatorial closed oriented triangulated surface.

    Attributes
    ----------
    vertex_count : int
        Vertices are the integers ``0 .. vertex_count-1``.
    edges : (E, 2) int array
        Endpoint vertices of each edge; loops (``a == b``) are allowed.
    face_edges : (F, 3) int array
        Edge *indices* (positions in ``edges``) of each oriented face.
    face_signs : (F, 3) int array
        +1 if the face walks the edge a→b, -1 for b→a.
    edge_ids, face_ids : (E,), (F,) int arrays
        External ids, preserved from the input file.

    The corner at slot ``s`` of a face is the tail vertex of its ``s``-th
    directed edge; the three directed edges must chain head-to-tail.
    Instances are immutable after construction and safe to share.
    """

    vertex_count: int
    edges: np.ndarray
    face_edges: np.ndarray
    face_signs: np.ndarray
    edge_ids: np.ndarray
    face_ids: np.ndarray
    face_corners: np.ndarray = field(init=False)

    def __post_init__(self):
        self.edges = np.ascontiguousarray(self.edges, dtype=np.int64)
        self.face_edges = np.ascontiguousarray(self.face_edges, dtype=np.int64)
        self.face_signs = np.ascontiguousarray(self.face_signs, dtype=np.int64)
        self.edge_ids = np.ascontiguousarray(self.edge_ids, dtype=np.int64)
        self.face_ids = np.ascontiguousarray(self.face_ids, dtype=np.int64)

        if self.edges.size and (self.edges.min() < 0
                                or self.edges.max() >= self.vertex_count):
            raise MeshError("edge endpoint out of vertex range")

        # Corner s = tail of directed edge s; check head-to-tail chaining.
        tails = np.where(self.face_signs > 0,
                         self.edges[self.face_edges, 0],
                         self.edges[self.face_edges, 1])
        heads = np.where(self.face_signs > 0,
                         self.edges[self.face_edges, 1],
                         self.edges[self.face_edges, 0])
        if not np.array_equal(heads, np.roll(tails, -1, axis=1)):
            bad = np.nonzero(
                (heads != np.roll(tails, -1, axis=1)).any(axis=1))[0]
            raise MeshError(
                f"face {self.face_ids[bad[0]]}: directed edges do not chain "
                "head-to-tail")
        self.face_corners = tails

        for a in (self.vertex_count, self.edges, self.face_edges,
                  self.face_signs, self.edge_ids, self.face_ids,
                  self.face_corners):
            if isinstance(a, np.ndarray):
                a.flags.writeable = False

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def face_count(self) -> int:
        return len(self.face_edges)

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - self.edge_count + self.face_count

    def edge_index(self, edge_id: int) -> int:
        """Position of an external edge id in the internal arrays."""
        lookup = getattr(self, "_eid_lookup", None)
        if lookup is None:
            lookup = {int(eid): e for e, eid in enumerate(self.edge_ids)}
            self._eid_lookup = lookup
        try:
            return lookup[edge_id]
        except KeyError:
            raise KeyError(f"unknown edge id {edge_id}") from None

    # -- incidence tables ---------------------------------------------------

    def edges_at_vertex(self) -> list[list[int]]:
        """Edge indices incident to each vertex (loops listed once)."""
        table: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for e, (a, b) in enumerate(self.edges):
            table[a].append(e)
            if b != a:
                table[b].append(e)
        return table

    def faces_at_edge(self) -> list[list[tuple[int, int]]]:
        """(face index, slot) pairs using each edge."""
        table: list[list[tuple[int, int]]] = [[] for _ in range(self.edge_count)]
        for f in range(self.face_count):
            for s in range(3):
                table[self.face_edges[f, s]].append((f, s))
        return table

    def corners_at_vertex(self) -> list[list[tuple[int, int]]]:
        """(face index, corner slot) pairs at each vertex."""
        table: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for f in range(self.face_count):
            for s in range(3):
                table[self.face_corners[f, s]].append((f, s))
        return table


@dataclass
class TopologyReport:
    """Result of :func:`validate_topology`."""

    chi: int
    genus: int
    is_simplicial: bool
    max_vertex_degree: int
    violations: list[str]

    @property
    def solver_eligible(self) -> bool:
        return not self.violations and self.genus >= 2


def _parse_int(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MeshError(f"line {lineno}: bad {what} {tok!r}") from None


def _parse_float(tok: str, what: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise MeshError(f"line {lineno}: bad {what} {tok!r}") from None


def load_mesh(text: str) -> tuple[SurfaceMesh, np.ndarray]:
    """Parse the mesh file format; returns (mesh, edge lengths).

    Lengths are indexed like ``mesh.edges`` (file order); external edge and
    face ids are preserved in ``edge_ids`` / ``face_ids``.
    """
    vertex_count = None
    edge_ids: list[int] = []
    edge_verts: list[tuple[int, int]] = []
    lengths: list[float] = []
    eid_to_index: dict[int, int] = {}
    face_ids: list[int] = []
    face_rows: list[tuple[list[int], list[int]]] = []
    fid_seen: set[int] = set()

    lines = text.splitlines()
    header_seen = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            if line != MAGIC:
                raise MeshError(f"line {lineno}: expected header {MAGIC!r}")
            header_seen = True
            continue
        toks = line.split()
        kind = toks[0]
        if kind == "v":
            if vertex_count is not None:
                raise MeshError(f"line {lineno}: duplicate 'v' line")
            if len(toks) != 2:
                raise MeshError(f"line {lineno}: 'v' takes one count")
            vertex_count = _parse_int(toks[1], "vertex count", lineno)
            if vertex_count <= 0:
                raise MeshError(f"line {lineno}: vertex count must be > 0")
        elif kind == "e":
            if vertex_count is None:
                raise MeshError(f"line {lineno}: 'e' before 'v'")
            if len(toks) != 5:
                raise MeshError(f"line {lineno}: 'e' takes id, endpoints, length")
            eid = _parse_int(toks[1], "edge id", lineno)
            if eid in eid_to_index:
                raise MeshError(f"line {lineno}: duplicate edge id {eid}")
            a = _parse_int(toks[2], "vertex", lineno)
            b = _parse_int(toks[3], "vertex", lineno)
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise MeshError(f"line {lineno}: vertex id out of range")
            length = _parse_float(toks[4], "length", lineno)
            if not length > 0:
                raise MeshError(f"line {lineno}: edge length must be > 0")
            eid_to_index[eid] = len(edge_ids)
            edge_ids.append(eid)
            edge_verts.append((a, b))
            lengths.append(length)
        elif kind == "f":
            if len(toks) != 5:
                raise MeshError(f"line {lineno}: 'f' takes id and 3 signed edges")
            fid = _parse_int(toks[1], "face id", lineno)
            if fid in fid_seen:
                raise MeshError(f"line {lineno}: duplicate face id {fid}")
            fid_seen.add(fid)
            eidx: list[int] = []
            signs: list[int] = []
            for tok in toks[2:]:
                sign = 1
                t = tok
                if t.startswith("+"):
                    t = t[1:]
                elif t.startswith("-"):
                    sign = -1
                    t = t[1:]
                eid = _parse_int(t, "edge reference", lineno)
                if eid not in eid_to_index:
                    raise MeshError(f"line {lineno}: face {fid} references "
                                    f"unknown edge {eid}")
                eidx.append(eid_to_index[eid])
                signs.append(sign)
            face_ids.append(fid)
            face_rows.append((eidx, signs))
        else:
            raise MeshError(f"line {lineno}: unknown record {kind!r}")

    if not header_seen:
        raise MeshError("empty file: missing header")
    if vertex_count is None:
        raise MeshError("missing 'v' line")
    if not face_rows:
        raise MeshError("mesh has no faces")

    face_edges = np.array([r[0] for r in face_rows], dtype=np.int64)
    face_signs = np.array([r[1] for r in face_rows], dtype=np.int64)

    slot_count = np.zeros(len(edge_ids), dtype=np.int64)
    np.add.at(slot_count, face_edges.ravel(), 1)
    if (slot_count > 2).any():
        eid = edge_ids[int(np.argmax(slot_count > 2))]
        raise MeshError(f"non-manifold edge {eid}: used by more than 2 face slots")
    if (slot_count < 2).any():
        eid = edge_ids[int(np.argmax(slot_count < 2))]
        raise MeshError(f"dangling edge {eid}: not used by exactly 2 face slots")

    mesh = SurfaceMesh(vertex_count=vertex_count,
                       edges=np.array(edge_verts, dtype=np.int64),
                       face_edges=face_edges,
                       face_signs=face_signs,
                       edge_ids=np.array(edge_ids, dtype=np.int64),
                       face_ids=np.array(face_ids, dtype=np.int64))
    return mesh, np.array(lengths, dtype=float)


def dump_mesh(mesh: SurfaceMesh, lengths: np.ndarray) -> str:
    """Serialize back to the mesh file format (round-trip identity)."""
    out = [MAGIC, f"v {mesh.vertex_count}"]
    for e in range(mesh.edge_count):
        a, b = mesh.edges[e]
        out.append(f"e {mesh.edge_ids[e]} {a} {b} {lengths[e]:.17g}")
    for f in range(mesh.face_count):
        refs = []
        for s in range(3):
            eid = mesh.edge_ids[mesh.face_edges[f, s]]
            refs.append(f"+{eid}" if mesh.face_signs[f, s] > 0 else f"-{eid}")
        out.append(f"f {mesh.face_ids[f]} {' '.join(refs)}")
    return "\n".join(out) + "\n"


def validate_topology(mesh: SurfaceMesh) -> TopologyReport:
    """Report Euler characteristic, genus, simpliciality and defects.

    Defects (wrong orientation, disconnectedness, odd Euler characteristic)
    are reported, not raised; a mesh is solver eligible iff there are no
    violations and genus >= 2.
    """
    violations: list[str] = []

    # Each edge must be traversed once in each direction by its two slots.
    sign_sum = np.zeros(mesh.edge_count, dtype=np.int64)
    np.add.at(sign_sum, mesh.face_edges.ravel(), mesh.face_signs.ravel())
    slot_count = np.zeros(mesh.edge_count, dtype=np.int64)
    np.add.at(slot_count, mesh.face_edges.ravel(), 1)
    for e in np.nonzero(slot_count != 2)[0]:
        violations.append(f"edge {mesh.edge_ids[e]} used by {slot_count[e]} "
                          "face slots (expected 2)")
    for e in np.nonzero((slot_count == 2) & (sign_sum != 0))[0]:
        violations.append(f"edge {mesh.edge_ids[e]} traversed twice in the "
                          "same direction (orientation defect)")

    # Connectivity of the 1-skeleton (vertices + edges).
    seen = np.zeros(mesh.vertex_count, dtype=bool)
    adj = mesh.edges_at_vertex()
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for e in adj[v]:
            for w in mesh.edges[e]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
    if not seen.all():
        violations.append("mesh is disconnected")

    chi = mesh.euler_characteristic
    if chi % 2 != 0:
        violations.append(f"odd Euler characteristic {chi}")
    genus = (2 - chi) // 2

    degree = np.zeros(mesh.vertex_count, dtype=np.int64)
    np.add.at(degree, mesh.edges.ravel(), 1)

    has_loop = bool((mesh.edges[:, 0] == mesh.edges[:, 1]).any())
    key = np.sort(mesh.edges, axis=1)
    has_multi = len(np.unique(key, axis=0)) < mesh.edge_count
    degenerate_face = any(len(set(mesh.face_corners[f])) < 3
                          for f in range(mesh.face_count))
    is_simplicial = not (has_loop or has_multi or degenerate_face)

    return TopologyReport(chi=chi, genus=genus, is_simplicial=is_simplicial,
                          max_vertex_degree=int(degree.max()),
                          violations=violations)


def load_face_curvature(text: str, mesh: SurfaceMesh) -> np.ndarray:
    """Parse `k <face_id> <value>` lines into a per-face curvature vector."""
    values: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] != "k" or len(toks) != 3:
            raise MeshError(f"line {lineno}: expected 'k <face_id> <value>'")
        fid = _parse_int(toks[1], "face id", lineno)
        if fid in values:
            raise MeshError(f"line {lineno}: duplicate face id {fid}")
        values[fid] = _parse_float(toks[2], "curvature", lineno)
    kappa = np.empty(mesh.face_count, dtype=float)
    for f in range(mesh.face_count):
        fid = int(mesh.face_ids[f])
        if fid not in values:
            raise MeshError(f"missing curvature for face {fid}")
        kappa[f] = values[fid]
    extra = set(values) - set(int(i) for i in mesh.face_ids)
    if extra:
        raise MeshError(f"curvature given for unknown face {min(extra)}")
    if not (kappa < 0).all():
        raise MeshError("face curvatures must be strictly negative")
    return kappa
