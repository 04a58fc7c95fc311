"""Geometry audits: counts, coloring, matchings, layer structure."""

import pytest

from xcube_floquet.lattice import (
    ARMS,
    PLANES,
    LatticeConfig,
    LatticeError,
    build_lattice,
)


@pytest.fixture(scope="module")
def lat2():
    return build_lattice(2)


@pytest.fixture(scope="module")
def lat4():
    return build_lattice(4)


def test_config_validation():
    with pytest.raises(LatticeError, match="L must be even"):
        LatticeConfig(3)
    with pytest.raises(LatticeError):
        LatticeConfig(0)
    with pytest.raises(LatticeError):
        LatticeConfig(2, boundary="open")
    assert LatticeConfig(2).L == 2


@pytest.mark.parametrize("L,nq", [(2, 96), (4, 768)])
def test_census(L, nq, lat2, lat4):
    lat = lat2 if L == 2 else lat4
    assert lat.n_qubits == nq == 12 * L**3
    assert len(lat.sites) == 6 * L**3
    assert len(lat.layers) == 3 * L
    assert len(lat.yellow_edges) == 6 * L**3
    assert len(lat.diag_edges) == 12 * L**3
    assert len(lat.blue_edges) == 6 * L**3
    assert len(lat.green_edges) == 6 * L**3
    assert len(lat.onsite_pairs) == 6 * L**3
    assert len(lat.diamonds) == 3 * L**3
    assert len(lat.octagons) == 3 * L**3
    assert sum(1 for o in lat.octagons if o.color == "blue") == 3 * L**3 // 2
    assert sum(1 for o in lat.octagons if o.color == "green") == 3 * L**3 // 2
    assert len(lat.cubes) == L**3


def test_qubit_id_round_trip(lat2):
    for qid in range(lat2.n_qubits):
        v, arm, plane = lat2.qubit_at(qid)
        assert lat2.qubit_index((v, arm), plane) == qid
    assert lat2.qubit_index(((0, 0, 0), "+x"), "XY") == 0
    with pytest.raises(LatticeError):
        lat2.qubit_index(((0, 0, 0), "+x"), "YZ")  # x-edge not in a YZ plane


def test_face_color_rule(lat2, lat4):
    assert lat2.face_color((0, 0, 0), "z") == "blue"
    assert lat2.face_color((0, 0, 0), "x") == "blue"
    assert lat2.face_color((0, 0, 0), "y") == "blue"
    assert lat2.face_color((1, 0, 0), "z") == "green"
    assert lat2.face_color((1, 0, 0), "x") == "blue"
    assert lat2.face_color((1, 0, 0), "y") == "green"
    # every cube: all blue or exactly four green / two blue
    for lat in (lat2, lat4):
        for cube in lat.cubes:
            colors = [
                lat.octagons[lat.octagon_index[f]].color for f in lat.cube_faces(cube)
            ]
            greens = colors.count("green")
            assert greens in (0, 4)
            # opposite faces agree
            for axis in "xyz":
                faces = [f for f in lat.cube_faces(cube) if f[0] in PLANES and
                         lat.octagons[lat.octagon_index[f]].layer[0] ==
                         next(p for p in PLANES if p in f[0])]
            for plane in PLANES:
                pair = [f for f in lat.cube_faces(cube) if f[0] == plane]
                assert len(pair) == 2
                c1, c2 = (lat.octagons[lat.octagon_index[f]].color for f in pair)
                assert c1 == c2


def test_layer_members(lat2, lat4):
    for lat, L in ((lat2, 2), (lat4, 4)):
        seen_q = []
        seen_sites = []
        for lk in lat.layers:
            m = lat.layer_members(lk)
            assert len(m["qubits"]) == 4 * L**2
            assert len(m["yellow"]) == 2 * L**2
            assert len(m["blue"]) == 2 * L**2
            assert len(m["green"]) == 2 * L**2
            seen_q.extend(m["qubits"])
            seen_sites.extend(m["sites"])
            # every member qubit's plane is the layer plane
            for q in m["qubits"]:
                assert lat.qubit_layer(q) == lk
        # layers partition the qubits; sites each sit in two layers
        assert sorted(seen_q) == list(range(lat.n_qubits))
        assert len(seen_sites) == 2 * len(lat.sites)
        counts = {}
        for s in seen_sites:
            counts[s] = counts.get(s, 0) + 1
        assert set(counts.values()) == {2}


def test_orthogonal_layers_share_a_line_of_sites(lat2):
    xy = set(lat2.layer_members(("XY", 0))["sites"])
    xz = set(lat2.layer_members(("XZ", 0))["sites"])
    shared = xy & xz
    # the common cubic edges run along x at y=0, z=0: L edges, 2 sites each
    assert len(shared) == 2 * lat2.L
    for s in shared:
        v, arm = lat2.sites[s]
        assert arm in ("+x", "-x")
        assert v[1] == 0 and v[2] == 0


def test_vertex_degree_three_in_layer(lat2):
    # within a layer every qubit touches one yellow and two diagonal edges
    for lk in lat2.layers:
        m = lat2.layer_members(lk)
        deg_y = {q: 0 for q in m["qubits"]}
        deg_d = {q: 0 for q in m["qubits"]}
        for i in m["yellow"]:
            for q in lat2.yellow_edges[i].qubits:
                deg_y[q] += 1
        for i in m["blue"] + m["green"]:
            for q in lat2.diag_edges[i].qubits:
                deg_d[q] += 1
        assert set(deg_y.values()) == {1}
        assert set(deg_d.values()) == {2}


def test_diagonal_edges_are_perfect_matchings(lat2, lat4):
    for lat in (lat2, lat4):
        for color_ids in (lat.blue_edges, lat.green_edges):
            seen = set()
            for i in color_ids:
                for q in lat.diag_edges[i].qubits:
                    assert q not in seen
                    seen.add(q)
            assert len(seen) == lat.n_qubits


def test_diamond_structure(lat2):
    for d in lat2.diamonds:
        assert len(set(d.corners.values())) == 4
        sides = [lat2.diag_edges[i] for i in d.sides]
        assert [e.ptype for e in sides] == ["X", "Z", "X", "Z"]
        colors = [e.color for e in sides]
        assert colors.count("blue") == 2 and colors.count("green") == 2
        # both blue sides carry one type, both green sides the other
        blue_types = {e.ptype for e in sides if e.color == "blue"}
        green_types = {e.ptype for e in sides if e.color == "green"}
        assert len(blue_types) == 1 and len(green_types) == 1
        assert blue_types != green_types
        # the two same-color sides are disjoint and cover all four corners
        for color in ("blue", "green"):
            qs = [q for e in sides if e.color == color for q in e.qubits]
            assert sorted(qs) == sorted(d.corners.values())


def test_octagon_boundary(lat2):
    for o in lat2.octagons:
        kinds = [k for k, _ in o.boundary]
        assert kinds == ["y", "d", "y", "d", "y", "d", "y", "d"]
        diags = [lat2.diag_edges[i] for k, i in o.boundary if k == "d"]
        # boundary diagonals take the opposite color and alternate X/Z
        assert all(e.color != o.color for e in diags)
        assert sorted(e.ptype for e in diags) == ["X", "X", "Z", "Z"]
        for e in diags:
            assert e.octagon == o.face
        # boundary covers the eight corner qubits, each exactly twice
        touched = []
        for k, i in o.boundary:
            edge = lat2.yellow_edges[i] if k == "y" else lat2.diag_edges[i]
            touched.extend(edge.qubits)
        assert sorted(touched) == sorted(list(o.corner_qubits) * 2)
        assert len(set(o.corner_qubits)) == 8


def test_each_qubit_one_blue_one_green_within_diamond(lat2):
    # per qubit: its blue and green sides carry opposite Pauli types
    by_qubit = {}
    for e in lat2.diag_edges:
        for q in e.qubits:
            by_qubit.setdefault(q, []).append(e)
    for q, edges in by_qubit.items():
        assert len(edges) == 2
        assert {e.color for e in edges} == {"blue", "green"}
        assert {e.ptype for e in edges} == {"X", "Z"}


def test_dump_format(lat2):
    lines = list(lat2.dump_lines())
    assert lines[0] == "qubit 0 vertex=0,0,0 arm=+x plane=XY"
    assert lines[1] == "qubit 1 vertex=0,0,0 arm=+x plane=XZ"
    byprefix = {}
    for ln in lines:
        byprefix.setdefault(ln.split()[0], []).append(ln)
    assert len(byprefix["qubit"]) == 96
    assert len(byprefix["edge"]) == 48 * 3 + 48
    assert len(byprefix["plaquette"]) == 48
    assert len(byprefix["cube"]) == 8
    # deterministic rebuild
    assert lines == list(build_lattice(2).dump_lines())


def test_cubic_edge_sites(lat2):
    s1, s2 = lat2.cubic_edge_sites((1, 1, 1), "x")
    assert lat2.sites[s1] == ((1, 1, 1), "+x")
    assert lat2.sites[s2] == ((0, 1, 1), "-x")  # wraps at L=2
    assert lat2.cubic_edge_planes("x") == ("XY", "XZ")


def test_arm_count_constant():
    assert len(ARMS) == 6 and len(PLANES) == 3
