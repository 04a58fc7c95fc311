"""Coupled-layer 4.8.8 geometry on an L x L x L torus.

The scaffold is a periodic cubic lattice.  Every cubic edge carries two
sites, one near each endpoint, written (vertex, arm) with arm one of the
six signed axis directions.  Each site holds two qubits, one for each of
the two coordinate planes containing its edge, so a plane's worth of
sites forms a standalone 4.8.8 (square-octagon) lattice:

  * the two sites on a cubic edge, taken in a common plane, are the ends
    of a yellow edge;
  * the four in-plane arms around a cubic vertex are the corners of a
    diamond (the square plaquette), its sides being the diagonal edges;
  * the faces of the cubic lattice are the octagons.

Octagons are colored blue/green in a 3D-consistent checkerboard (see
face_color), diagonal edges take the color opposite to the one octagon
they border, and their Pauli type is fixed by orientation: southwest to
northeast sides are ZZ, northwest to southeast are XX, in the per-plane
axis convention below.

All containers are plain tuples and dicts, built once and then treated
as frozen.
"""

from __future__ import annotations

from dataclasses import dataclass

ARMS = ("+x", "-x", "+y", "-y", "+z", "-z")
PLANES = ("XY", "YZ", "XZ")
AXES = ("x", "y", "z")

# planes containing an edge of the given axis
ARM_PLANES = {"x": ("XY", "XZ"), "y": ("XY", "YZ"), "z": ("YZ", "XZ")}
# in-plane axes (u, v); the cyclic choice keeps the diagonal convention
# consistent across orientations
PLANE_AXES = {"XY": ("x", "y"), "YZ": ("y", "z"), "XZ": ("z", "x")}
PLANE_NORMAL = {"XY": "z", "YZ": "x", "XZ": "y"}
AXIS_OF = {"x": 0, "y": 1, "z": 2}

# diamond sides: (corner, corner, pauli type, octagon offset in (u, v))
# e/n/w/s are the +u/+v/-u/-v arms
DIAMOND_SIDES = (
    ("n", "e", "X", (0, 0)),
    ("s", "e", "Z", (0, -1)),
    ("w", "s", "X", (-1, -1)),
    ("w", "n", "Z", (-1, 0)),
)


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeConfig:
    L: int
    boundary: str = "periodic"

    def __post_init__(self) -> None:
        if self.boundary != "periodic":
            raise LatticeError("only periodic boundaries are supported")
        if self.L < 2 or self.L % 2:
            raise LatticeError(f"L must be even and at least 2, got {self.L}")


@dataclass(frozen=True)
class YellowEdge:
    index: int
    layer: tuple[str, int]
    qubits: tuple[int, int]
    cubic_edge: tuple[tuple[int, int, int], str]  # (vertex, axis), edge along +axis


@dataclass(frozen=True)
class DiagEdge:
    index: int
    layer: tuple[str, int]
    qubits: tuple[int, int]
    color: str  # blue | green
    ptype: str  # X | Z
    diamond: tuple[str, tuple[int, int, int]]  # (plane, vertex)
    octagon: tuple[str, tuple[int, int, int]]  # (plane, face min corner)


@dataclass(frozen=True)
class OnsitePair:
    index: int
    site: tuple[tuple[int, int, int], str]
    qubits: tuple[int, int]


@dataclass
class Diamond:
    index: int
    layer: tuple[str, int]
    vertex: tuple[int, int, int]
    corners: dict[str, int]  # e/n/w/s -> qubit id
    sides: tuple[int, ...]  # diag edge indices in DIAMOND_SIDES order


@dataclass
class Octagon:
    index: int
    layer: tuple[str, int]
    face: tuple[str, tuple[int, int, int]]
    color: str
    # boundary walked in order: alternating ("y", yellow idx), ("d", diag idx)
    boundary: tuple[tuple[str, int], ...]
    corner_qubits: tuple[int, ...]


class Lattice:
    """Frozen geometry; build once via build_lattice."""

    def __init__(self, cfg: LatticeConfig):
        self.cfg = cfg
        self.L = cfg.L
        L = cfg.L

        self.vertices = [(a, b, c) for a in range(L) for b in range(L) for c in range(L)]

        # sites and qubits, ids lexicographic by vertex, then arm, then plane
        self.sites: list[tuple[tuple[int, int, int], str]] = []
        self.site_index: dict[tuple[tuple[int, int, int], str], int] = {}
        self.qubits: list[tuple[tuple[int, int, int], str, str]] = []
        self.qubit_id: dict[tuple[tuple[int, int, int], str, str], int] = {}
        for v in self.vertices:
            for arm in ARMS:
                self.site_index[(v, arm)] = len(self.sites)
                self.sites.append((v, arm))
                for plane in PLANES:
                    if plane in ARM_PLANES[arm[1]]:
                        self.qubit_id[(v, arm, plane)] = len(self.qubits)
                        self.qubits.append((v, arm, plane))
        self.n_qubits = len(self.qubits)

        self.layers = [(plane, k) for plane in PLANES for k in range(L)]
        self.layer_index = {lk: i for i, lk in enumerate(self.layers)}

        self.cubic_edges = [
            (v, axis) for v in self.vertices for axis in AXES
        ]

        self.yellow_edges: list[YellowEdge] = []
        self.diag_edges: list[DiagEdge] = []
        self.onsite_pairs: list[OnsitePair] = []
        self.diamonds: list[Diamond] = []
        self.octagons: list[Octagon] = []
        self.octagon_index: dict[tuple[str, tuple[int, int, int]], int] = {}
        self.diamond_index: dict[tuple[str, tuple[int, int, int]], int] = {}

        self._build_onsite()
        for lk in self.layers:
            self._build_layer(lk)

        self.blue_edges = [e.index for e in self.diag_edges if e.color == "blue"]
        self.green_edges = [e.index for e in self.diag_edges if e.color == "green"]

        # cubes keyed by their minimum corner
        self.cubes = list(self.vertices)

    # ---- construction helpers ----

    def _wrap(self, v: tuple[int, int, int]) -> tuple[int, int, int]:
        L = self.L
        return (v[0] % L, v[1] % L, v[2] % L)

    def _step(self, v: tuple[int, int, int], axis: str, d: int) -> tuple[int, int, int]:
        w = list(v)
        w[AXIS_OF[axis]] += d
        return self._wrap(tuple(w))

    def _build_onsite(self) -> None:
        for i, (v, arm) in enumerate(self.sites):
            p1, p2 = ARM_PLANES[arm[1]]
            self.onsite_pairs.append(
                OnsitePair(i, (v, arm), (self.qubit_id[(v, arm, p1)], self.qubit_id[(v, arm, p2)]))
            )

    def _layer_vertices(self, lk: tuple[str, int]) -> list[tuple[int, int, int]]:
        plane, k = lk
        normal = PLANE_NORMAL[plane]
        return [v for v in self.vertices if v[AXIS_OF[normal]] == k]

    def layer_pos(self, lk: tuple[str, int], v: tuple[int, int, int]) -> tuple[int, int]:
        u, w = PLANE_AXES[lk[0]]
        return (v[AXIS_OF[u]], v[AXIS_OF[w]])

    def _vertex_at(self, lk: tuple[str, int], pos: tuple[int, int]) -> tuple[int, int, int]:
        plane, k = lk
        u, w = PLANE_AXES[plane]
        v = [0, 0, 0]
        v[AXIS_OF[u]] = pos[0] % self.L
        v[AXIS_OF[w]] = pos[1] % self.L
        v[AXIS_OF[PLANE_NORMAL[plane]]] = k
        return tuple(v)

    def _corner_arms(self, plane: str) -> dict[str, str]:
        u, v = PLANE_AXES[plane]
        return {"e": "+" + u, "n": "+" + v, "w": "-" + u, "s": "-" + v}

    def _build_layer(self, lk: tuple[str, int]) -> None:
        plane, _k = lk
        u, v_axis = PLANE_AXES[plane]
        arms = self._corner_arms(plane)

        # yellow edges: both in-plane directions from every layer vertex
        for vert in self._layer_vertices(lk):
            for axis in (u, v_axis):
                q1 = self.qubit_id[(vert, "+" + axis, plane)]
                q2 = self.qubit_id[(self._step(vert, axis, +1), "-" + axis, plane)]
                self.yellow_edges.append(
                    YellowEdge(len(self.yellow_edges), lk, (q1, q2), (vert, axis))
                )

        # diamonds and their diagonal sides
        for vert in self._layer_vertices(lk):
            corners = {c: self.qubit_id[(vert, arms[c], plane)] for c in "enws"}
            pos = self.layer_pos(lk, vert)
            side_ids = []
            for c1, c2, ptype, (du, dv) in DIAMOND_SIDES:
                oct_key = self._face_key(lk, (pos[0] + du, pos[1] + dv))
                color = "green" if self._face_blue(oct_key) else "blue"
                side_ids.append(len(self.diag_edges))
                self.diag_edges.append(
                    DiagEdge(
                        len(self.diag_edges), lk, (corners[c1], corners[c2]),
                        color, ptype, (plane, vert), oct_key,
                    )
                )
            self.diamond_index[(plane, vert)] = len(self.diamonds)
            self.diamonds.append(Diamond(len(self.diamonds), lk, vert, corners, tuple(side_ids)))

        # octagons, after the layer's edges exist
        yellow_at = {e.cubic_edge: e.index for e in self.yellow_edges if e.layer == lk}
        diag_at = {
            (e.diamond[1], frozenset(e.qubits)): e.index
            for e in self.diag_edges
            if e.layer == lk
        }
        for vert in self._layer_vertices(lk):
            pos = self.layer_pos(lk, vert)
            key = self._face_key(lk, pos)
            color = "blue" if self._face_blue(key) else "green"
            c00 = vert
            c10 = self._step(vert, u, +1)
            c11 = self._step(c10, v_axis, +1)
            c01 = self._step(vert, v_axis, +1)

            def diag(vtx, a, b):
                q1 = self.qubit_id[(vtx, arms[a], plane)]
                q2 = self.qubit_id[(vtx, arms[b], plane)]
                return diag_at[(vtx, frozenset((q1, q2)))]

            boundary = (
                ("y", yellow_at[(c00, u)]),
                ("d", diag(c10, "w", "n")),
                ("y", yellow_at[(c10, v_axis)]),
                ("d", diag(c11, "w", "s")),
                ("y", yellow_at[(c01, u)]),
                ("d", diag(c01, "s", "e")),
                ("y", yellow_at[(c00, v_axis)]),
                ("d", diag(c00, "n", "e")),
            )
            corner_qubits = tuple(
                self.qubit_id[(vtx, arms[c], plane)]
                for vtx, cs in ((c00, "en"), (c10, "wn"), (c11, "ws"), (c01, "es"))
                for c in cs
            )
            self.octagon_index[key] = len(self.octagons)
            self.octagons.append(
                Octagon(len(self.octagons), lk, key, color, boundary, corner_qubits)
            )

    def _face_key(self, lk: tuple[str, int], pos: tuple[int, int]) -> tuple[str, tuple[int, int, int]]:
        return (lk[0], self._vertex_at(lk, pos))

    def _face_blue(self, key: tuple[str, tuple[int, int, int]]) -> bool:
        plane, vert = key
        u, v = PLANE_AXES[plane]
        return (vert[AXIS_OF[u]] + vert[AXIS_OF[v]]) % 2 == 0

    # ---- queries ----

    def qubit_index(self, site: tuple[tuple[int, int, int], str], plane: str) -> int:
        key = (self._wrap(site[0]), site[1], plane)
        if key not in self.qubit_id:
            raise LatticeError(f"no qubit for site {site} in plane {plane}")
        return self.qubit_id[key]

    def qubit_at(self, qid: int) -> tuple[tuple[int, int, int], str, str]:
        return self.qubits[qid]

    def qubit_layer(self, qid: int) -> tuple[str, int]:
        v, _arm, plane = self.qubits[qid]
        return (plane, v[AXIS_OF[PLANE_NORMAL[plane]]])

    def face_color(self, cube: tuple[int, int, int], axis: str) -> str:
        """Color of the two faces of `cube` normal to `axis` (they agree)."""
        plane = next(p for p in PLANES if PLANE_NORMAL[p] == axis)
        return "blue" if self._face_blue((plane, self._wrap(cube))) else "green"

    def cube_faces(self, cube: tuple[int, int, int]):
        out = []
        for plane in PLANES:
            normal = PLANE_NORMAL[plane]
            out.append((plane, self._wrap(cube)))
            out.append((plane, self._step(cube, normal, +1)))
        return out

    def layer_members(self, lk: tuple[str, int]):
        """Qubits, sites, and per-color edge index lists of one layer."""
        plane, _k = lk
        arms = self._corner_arms(plane)
        qids = []
        site_ids = []
        for vert in self._layer_vertices(lk):
            for c in "enws":
                qids.append(self.qubit_id[(vert, arms[c], plane)])
                site_ids.append(self.site_index[(vert, arms[c])])
        yellow = [e.index for e in self.yellow_edges if e.layer == lk]
        blue = [e.index for e in self.diag_edges if e.layer == lk and e.color == "blue"]
        green = [e.index for e in self.diag_edges if e.layer == lk and e.color == "green"]
        return {
            "qubits": sorted(qids),
            "sites": sorted(site_ids),
            "yellow": yellow,
            "blue": blue,
            "green": green,
        }

    def octahedron_sites(self, vertex: tuple[int, int, int]) -> list[int]:
        return [self.site_index[(vertex, arm)] for arm in ARMS]

    def cubic_edge_sites(self, vertex: tuple[int, int, int], axis: str) -> tuple[int, int]:
        s1 = self.site_index[(vertex, "+" + axis)]
        s2 = self.site_index[(self._step(vertex, axis, +1), "-" + axis)]
        return (s1, s2)

    def cubic_edge_planes(self, axis: str) -> tuple[str, str]:
        return ARM_PLANES[axis]

    def dump_lines(self):
        for qid, (v, arm, plane) in enumerate(self.qubits):
            yield f"qubit {qid} vertex={v[0]},{v[1]},{v[2]} arm={arm} plane={plane}"
        for e in self.yellow_edges:
            yield (
                f"edge yellow {e.index} layer={e.layer[0]}:{e.layer[1]} type=Y "
                f"qubits={e.qubits[0]},{e.qubits[1]}"
            )
        for e in self.diag_edges:
            yield (
                f"edge diagonal {e.index} layer={e.layer[0]}:{e.layer[1]} color={e.color} "
                f"type={e.ptype} qubits={e.qubits[0]},{e.qubits[1]}"
            )
        for p in self.onsite_pairs:
            (v, arm) = p.site
            yield f"edge onsite {p.index} site={v[0]},{v[1]},{v[2]}:{arm} qubits={p.qubits[0]},{p.qubits[1]}"
        for d in self.diamonds:
            v = d.vertex
            yield f"plaquette square {d.index} layer={d.layer[0]}:{d.layer[1]} vertex={v[0]},{v[1]},{v[2]}"
        for o in self.octagons:
            v = o.face[1]
            yield (
                f"plaquette octagon {o.index} layer={o.layer[0]}:{o.layer[1]} "
                f"face={v[0]},{v[1]},{v[2]}:{PLANE_NORMAL[o.face[0]]} color={o.color}"
            )
        for i, cube in enumerate(self.cubes):
            yield f"cube {i} vertex={cube[0]},{cube[1]},{cube[2]}"


def build_lattice(cfg: LatticeConfig | int) -> Lattice:
    if isinstance(cfg, int):
        cfg = LatticeConfig(cfg)
    return Lattice(cfg)
