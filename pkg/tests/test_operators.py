"""Checks, plaquettes, cubes, zigzags, Y-strings, and their relations."""

from collections import defaultdict

import numpy as np
import pytest

from xcube_floquet.lattice import build_lattice
from xcube_floquet.operators import (
    StripError,
    all_checks,
    build_checks,
    build_cube_stabilizer,
    build_plaquette,
    build_zigzag,
    extract_nonlocal_generators,
    find_outer_logicals,
    octagon_plaquettes,
    square_plaquettes,
    symplectic_partners,
)
from xcube_floquet.symplectic import GeneratorSet, PauliOp, product, sympl

from oracle_dense import dense


@pytest.fixture(scope="module")
def lat():
    return build_lattice(2)


@pytest.fixture(scope="module")
def checks(lat):
    return all_checks(lat)


@pytest.fixture(scope="module")
def plaquettes(lat):
    return square_plaquettes(lat) + octagon_plaquettes(lat)


def restricted_product(lat, factors):
    """Re-multiply the factors on a small register holding just their
    support, through dense matrices.  Independent of PauliOp.__mul__'s
    bit tricks; used to pin the sign conventions."""
    qubits = sorted({q for f in factors for q in f.support_qubits()})
    assert len(qubits) <= 12
    remap = {q: i for i, q in enumerate(qubits)}
    small = []
    for f in factors:
        small.append(
            PauliOp.from_support(
                len(qubits), {remap[q]: f.letter_at(q) for q in f.support_qubits()},
                f.phase,
            )
        )
    m = np.eye(2 ** len(qubits), dtype=complex)
    for s in small:
        m = m @ dense(s)
    return qubits, remap, m


def test_check_counts_and_types(lat, checks):
    seen = set()
    for kind, ops in checks.items():
        assert len(ops) == 48
        for op in ops:
            assert op.is_hermitian and op.sign == 1 and op.weight == 2
            seen.add(op.vec)
        letters = {c for op in ops for c in op.letters() if c != "I"}
        assert letters == ({"Y"} if kind in ("yellow", "onsite") else {"X", "Z"})
    assert len(seen) == 192


def test_yellow_and_onsite_commute_elementwise(checks):
    for y in checks["yellow"]:
        assert all(y.commutes_with(o) for o in checks["onsite"])


def test_square_plaquette_form(lat):
    for d in lat.diamonds:
        sq = build_plaquette(lat, d)
        assert sq.weight == 4
        assert set(sq.support_qubits()) == set(d.corners.values())
        assert all(sq.letter_at(q) == "Y" for q in sq.support_qubits())
        assert sq.sign == -1


def test_square_sign_against_dense_product(lat):
    d = lat.diamonds[0]
    factors = [build_plaquette(lat, d)]
    sides = [lat.diag_edges[i] for i in d.sides]
    side_ops = [
        PauliOp.from_support(lat.n_qubits, {q: e.ptype for q in e.qubits})
        for e in sides
    ]
    qubits, remap, m = restricted_product(lat, side_ops)
    sq = build_plaquette(lat, d)
    small_sq = PauliOp.from_support(
        len(qubits), {remap[q]: sq.letter_at(q) for q in sq.support_qubits()}, sq.phase
    )
    assert np.allclose(m, dense(small_sq))


def test_octagon_plaquette_form(lat):
    for o in lat.octagons:
        op = build_plaquette(lat, o)
        assert op.weight == 8
        assert set(op.support_qubits()) == set(o.corner_qubits)
        for q in op.support_qubits():
            assert lat.qubit_layer(q) == o.layer
        assert op.is_hermitian


def test_octagon_sign_against_dense_product(lat):
    o = lat.octagons[0]
    factors = []
    for kind, i in o.boundary:
        e = lat.yellow_edges[i] if kind == "y" else lat.diag_edges[i]
        letter = "Y" if kind == "y" else e.ptype
        factors.append(
            PauliOp.from_support(lat.n_qubits, {q: letter for q in e.qubits})
        )
    qubits, remap, m = restricted_product(lat, factors)
    op = build_plaquette(lat, o)
    small = PauliOp.from_support(
        len(qubits), {remap[q]: op.letter_at(q) for q in op.support_qubits()}, op.phase
    )
    assert np.allclose(m, dense(small))


def test_plaquettes_commute_with_intra_layer_checks(lat, checks, plaquettes):
    flat = checks["yellow"] + checks["blue"] + checks["green"]
    for p in plaquettes:
        assert all(p.commutes_with(c) for c in flat)


def test_plaquettes_against_onsite_checks(lat, checks):
    # squares are all-Y and sail through; an octagon meets the on-site
    # pair of each corner site in exactly one qubit and anticommutes
    # with those eight, which is what evicts octagons from the group
    # when the on-site round is measured
    for d in lat.diamonds:
        sq = build_plaquette(lat, d)
        assert all(sq.commutes_with(c) for c in checks["onsite"])
    for o in lat.octagons:
        op = build_plaquette(lat, o)
        corner_sites = {lat.qubit_at(q)[:2] for q in o.corner_qubits}
        bad = [s for s, c in enumerate(checks["onsite"]) if not op.commutes_with(c)]
        assert len(bad) == 8
        assert {lat.onsite_pairs[s].site for s in bad} == corner_sites


def test_plaquettes_commute_pairwise(plaquettes):
    for i, a in enumerate(plaquettes):
        for b in plaquettes[i + 1:]:
            assert a.commutes_with(b)


def test_cube_stabilizers(lat, checks):
    flat = [c for ops in checks.values() for c in ops]
    ops = [build_cube_stabilizer(lat, c) for c in lat.cubes]
    assert len(ops) == 8
    for op in ops:
        assert op.is_hermitian
        assert (op * op).is_identity
        assert all(op.commutes_with(c) for c in flat)


# ---- the five relation families, with the signs literal multiplication gives


def test_relation_cubic_edge(lat, checks):
    by_edge = defaultdict(list)
    for e in lat.yellow_edges:
        by_edge[e.cubic_edge].append(e.index)
    assert len(by_edge) == 24
    for ce, (i, j) in by_edge.items():
        s1, s2 = lat.cubic_edge_sites(*ce)
        p = product(
            [checks["yellow"][i], checks["yellow"][j],
             checks["onsite"][s1], checks["onsite"][s2]],
            n=lat.n_qubits,
        )
        assert p.is_identity


def test_relation_octahedron(lat, checks):
    # three squares at a vertex against its six on-site checks; the -1
    # comes from each square carrying the -YYYY convention
    by_vertex = defaultdict(list)
    for d in lat.diamonds:
        by_vertex[d.vertex].append(build_plaquette(lat, d))
    for v in lat.vertices:
        ons = [checks["onsite"][s] for s in lat.octahedron_sites(v)]
        assert len(by_vertex[v]) == 3 and len(ons) == 6
        p = product(by_vertex[v] + ons, n=lat.n_qubits)
        assert p.vec == 0 and p.sign == -1


def test_relation_per_layer(lat, checks):
    for lk in lat.layers:
        m = lat.layer_members(lk)
        ys = [checks["yellow"][i] for i in m["yellow"]]
        sqs = [build_plaquette(lat, d) for d in lat.diamonds if d.layer == lk]
        p = product(ys + sqs, n=lat.n_qubits)
        assert p.is_identity


def test_relation_cube_slab(lat):
    # cubes of one slab against all octagons of the two bounding layers
    for plane, axis in (("XY", 2), ("YZ", 0), ("XZ", 1)):
        for k in range(lat.L):
            cubes = [build_cube_stabilizer(lat, c) for c in lat.cubes if c[axis] == k]
            octs = [
                build_plaquette(lat, o)
                for o in lat.octagons
                if o.layer in ((plane, k), (plane, (k + 1) % lat.L))
            ]
            p = product(cubes + octs, n=lat.n_qubits)
            assert p.is_identity


def test_relation_zigzag_around_cube(lat, checks):
    zig = {
        o.face: build_zigzag(lat, o.face, "step2")
        for o in lat.octagons if o.color == "blue"
    }
    small = GeneratorSet(
        lat.n_qubits, square_plaquettes(lat) + octagon_plaquettes(lat, "green")
    )
    wide = small.copy()
    for c in lat.cubes:
        wide.add(build_cube_stabilizer(lat, c))
    for b in checks["blue"]:
        wide.add(b)
    for c in lat.cubes:
        blue_faces = [
            f for f in lat.cube_faces(c)
            if lat.octagons[lat.octagon_index[f]].color == "blue"
        ]
        p = product([zig[f] for f in blue_faces], n=lat.n_qubits)
        if len(blue_faces) == 6:
            assert small.sign_of(p) == 1
        else:
            assert len(blue_faces) == 2
            assert small.sign_of(p) is None  # needs the wider span
            assert wide.sign_of(p) == 1


# ---- zigzags


def test_zigzag_counts_and_round_commutation(lat, checks):
    faces = [o.face for o in lat.octagons if o.color == "blue"]
    assert len(faces) == 12
    for f in faces:
        z2 = build_zigzag(lat, f, "step2")
        z3 = build_zigzag(lat, f, "step3")
        assert z2.weight == 16 and z3.weight == 16
        assert set(z2.letters()) - {"I"} == {"Y"}
        for fam in ("blue", "yellow", "onsite"):
            assert all(z2.commutes_with(c) for c in checks[fam])
        for fam in ("green", "blue"):
            assert all(z3.commutes_with(c) for c in checks[fam])
        # neither variant survives the next round of the schedule
        assert not all(z2.commutes_with(c) for c in checks["green"])
        assert not all(z3.commutes_with(c) for c in checks["yellow"])
        # support sits in the two perpendicular layers
        planes = {lat.qubit_layer(q)[0] for q in z2.support_qubits()}
        assert len(planes) == 2 and f[0] not in planes


def test_zigzag_usage_errors(lat):
    green_face = next(o.face for o in lat.octagons if o.color == "green")
    with pytest.raises(ValueError, match="blue faces"):
        build_zigzag(lat, green_face)
    blue_face = next(o.face for o in lat.octagons if o.color == "blue")
    with pytest.raises(ValueError, match="variant"):
        build_zigzag(lat, blue_face, "step4")
    with pytest.raises(ValueError, match="not a face"):
        build_zigzag(lat, ("XY", (9, 9, 9)))


# ---- outer logicals


@pytest.fixture(scope="module")
def outers(lat):
    ops = []
    for lk in lat.layers:
        for direction in sorted(
            {"XY": "xy", "YZ": "yz", "XZ": "zx"}[lk[0]]
        ):
            got = find_outer_logicals(lat, lk, direction)
            assert len(got) == 1
            ops.append(got[0])
    return ops


def test_outer_logical_census(lat, outers):
    assert len(outers) == 12  # 6L at L=2
    for op in outers:
        assert op.weight == lat.L
        assert set(op.letters()) - {"I"} == {"Y"}
        assert op.sign == 1


def test_outer_logicals_commute_with_stabilizer_content(lat, checks, plaquettes, outers):
    cubes = [build_cube_stabilizer(lat, c) for c in lat.cubes]
    for op in outers:
        assert all(op.commutes_with(c) for c in checks["yellow"])
        assert all(op.commutes_with(c) for c in checks["onsite"])
        assert all(op.commutes_with(p) for p in plaquettes + cubes)
        # no all-Y string can also commute with every diagonal check
        diag = checks["blue"] + checks["green"]
        assert not all(op.commutes_with(c) for c in diag)


def test_outer_logicals_independent_modulo_initial_isg(lat, checks, plaquettes, outers):
    gs = GeneratorSet(lat.n_qubits, checks["yellow"] + plaquettes)
    base = gs.rank
    for op in outers:
        assert gs.add(op)
    assert gs.rank == base + 12


def test_outer_logical_direction_validation(lat):
    with pytest.raises(ValueError, match="in-plane"):
        find_outer_logicals(lat, ("XY", 0), "z")
    with pytest.raises(ValueError, match="strip_width"):
        find_outer_logicals(lat, ("XY", 0), "x", strip_width=0)


def test_symplectic_partners_pairing(lat, checks, plaquettes, outers):
    gs = GeneratorSet(lat.n_qubits, checks["yellow"] + plaquettes)
    partners = symplectic_partners(gs, outers)
    assert len(partners) == 12
    for i, p in enumerate(partners):
        for g in gs.ops():
            assert p.commutes_with(g)
        for j, o in enumerate(outers):
            assert sympl(p, o) == (1 if i == j else 0)


# ---- quotient extraction mechanics


def test_extract_nonlocal_generators_toy():
    isg = GeneratorSet(3, [
        PauliOp.from_string("XXI"),
        PauliOp.from_string("IXX"),
        PauliOp.from_string("ZZZ"),
    ])
    local = GeneratorSet(3, [PauliOp.from_string("XXI")])
    extra = extract_nonlocal_generators(isg, local)
    assert extra.rank == 2
    probe = local.copy()
    for g in extra.ops():
        assert isg.in_span(g)
        assert probe.add(g)
    assert probe.same_span(isg)


def test_extract_nonlocal_generators_rejects_outside_local():
    isg = GeneratorSet(2, [PauliOp.from_string("XX")])
    local = GeneratorSet(2, [PauliOp.from_string("ZZ")])
    with pytest.raises(ValueError, match="inside the group"):
        extract_nonlocal_generators(isg, local)
