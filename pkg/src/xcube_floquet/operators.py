"""Check operators and the stabilizers built out of them.

Checks come in four two-qubit families: yellow checks along lattice
edges, on-site checks tying the two qubits of a site together, and the
blue and green diagonal checks on the diamond sides.  Everything else
here is a product of checks: square and octagon plaquettes, cube
stabilizers, the zigzag stabilizers of the intra-layer rounds, and the
homologically nontrivial Y-strings carrying the logical information.

Sign convention: a constructed stabilizer carries exactly the sign
produced by multiplying its +1 check factors in the documented order.
"""

from __future__ import annotations

from itertools import product as iproduct

from .lattice import (
    Diamond,
    Lattice,
    Octagon,
    PLANE_AXES,
    PLANE_NORMAL,
)
from .symplectic import (
    GeneratorSet,
    PauliOp,
    in_rowspan,
    kernel_basis,
    product,
    sympl_vec,
)

CHECK_KINDS = ("yellow", "blue", "green", "onsite")


class StripError(RuntimeError):
    """No nontrivial logical class lives in the requested strip."""


def build_checks(lat: Lattice, kind: str) -> list[PauliOp]:
    """All checks of one family, indexed like the lattice records.

    Yellow and on-site checks are YY; blue and green checks are XX or
    ZZ according to the side orientation of their diagonal edge.
    """
    n = lat.n_qubits
    if kind == "yellow":
        return [_yellow_check(lat, e.index) for e in lat.yellow_edges]
    if kind == "onsite":
        return [
            PauliOp.from_support(n, {q: "Y" for q in p.qubits})
            for p in lat.onsite_pairs
        ]
    if kind in ("blue", "green"):
        ids = lat.blue_edges if kind == "blue" else lat.green_edges
        return [_diag_check(lat, i) for i in ids]
    raise ValueError(f"unknown check kind {kind!r}")


def all_checks(lat: Lattice) -> dict[str, list[PauliOp]]:
    return {kind: build_checks(lat, kind) for kind in CHECK_KINDS}


def _yellow_check(lat: Lattice, index: int) -> PauliOp:
    e = lat.yellow_edges[index]
    return PauliOp.from_support(lat.n_qubits, {q: "Y" for q in e.qubits})


def _diag_check(lat: Lattice, index: int) -> PauliOp:
    e = lat.diag_edges[index]
    return PauliOp.from_support(lat.n_qubits, {q: e.ptype for q in e.qubits})


def _onsite_check(lat: Lattice, site: int) -> PauliOp:
    p = lat.onsite_pairs[site]
    return PauliOp.from_support(lat.n_qubits, {q: "Y" for q in p.qubits})


def build_plaquette(lat: Lattice, plaq: Diamond | Octagon) -> PauliOp:
    """Signed product of the boundary checks in the canonical walk order.

    Squares multiply their four diagonal sides; octagons alternate the
    four yellow edges with the four opposite-color diagonals.
    """
    if isinstance(plaq, Diamond):
        factors = [_diag_check(lat, i) for i in plaq.sides]
    elif isinstance(plaq, Octagon):
        factors = [
            _yellow_check(lat, i) if kind == "y" else _diag_check(lat, i)
            for kind, i in plaq.boundary
        ]
    else:
        raise TypeError(f"expected a Diamond or Octagon record, got {type(plaq).__name__}")
    return product(factors, n=lat.n_qubits)


def square_plaquettes(lat: Lattice) -> list[PauliOp]:
    return [build_plaquette(lat, d) for d in lat.diamonds]


def octagon_plaquettes(lat: Lattice, color: str | None = None) -> list[PauliOp]:
    octs = lat.octagons if color is None else [o for o in lat.octagons if o.color == color]
    return [build_plaquette(lat, o) for o in octs]


def build_cube_stabilizer(lat: Lattice, cube: tuple[int, int, int]) -> PauliOp:
    """Product of the six octagon plaquettes on the faces of a cube."""
    faces = lat.cube_faces(cube)
    factors = [build_plaquette(lat, lat.octagons[lat.octagon_index[f]]) for f in faces]
    return product(factors, n=lat.n_qubits)


def build_zigzag(lat: Lattice, blue_face, variant: str = "step2") -> PauliOp:
    """Zigzag stabilizer attached to a blue face.

    The step2 form multiplies the four yellow checks of the face's
    boundary edges taken in the perpendicular layers with four on-site
    checks at normal-direction sites over the corners; which side of
    each corner carries the on-site check is fixed by requiring
    commutation with every blue check, and that requirement has a
    unique solution.  The step3 form multiplies step2 by the eight
    blue checks pairing up its support.
    """
    if variant not in ("step2", "step3"):
        raise ValueError(f"variant must be step2 or step3, got {variant!r}")
    if blue_face not in lat.octagon_index:
        raise ValueError(f"{blue_face!r} is not a face of the lattice")
    octagon = lat.octagons[lat.octagon_index[blue_face]]
    if octagon.color != "blue":
        raise ValueError("zigzag stabilizers attach to blue faces only")

    plane, v0 = octagon.face
    u, v = PLANE_AXES[plane]
    normal = PLANE_NORMAL[plane]
    n = lat.n_qubits

    def shift(vtx, axis, d=1):
        i = "xyz".index(axis)
        out = list(vtx)
        out[i] = (out[i] + d) % lat.L
        return tuple(out)

    # boundary cubic edges of the face, walked bottom / right / top / left
    cubic = [
        (v0, u),
        (shift(v0, u), v),
        (shift(v0, v), u),
        (v0, v),
    ]
    perp_yellow = {(e.cubic_edge, e.layer[0]): e.index for e in lat.yellow_edges}
    yellows = []
    for vtx, axis in cubic:
        other = next(p for p in PLANE_AXES if axis in PLANE_AXES[p] and p != plane)
        yellows.append(_yellow_check(lat, perp_yellow[((vtx, axis), other)]))

    corners = [v0, shift(v0, u), shift(shift(v0, u), v), shift(v0, v)]
    solutions = []
    blues = [_diag_check(lat, i) for i in lat.blue_edges]
    for signs in iproduct(("+", "-"), repeat=4):
        onsites = [
            _onsite_check(lat, lat.site_index[(vtx, s + normal)])
            for vtx, s in zip(corners, signs)
        ]
        cand = product(yellows + onsites, n=n)
        if all(cand.commutes_with(b) for b in blues):
            solutions.append(cand)
    if len(solutions) != 1:
        raise RuntimeError(
            f"expected a unique on-site side pattern for face {blue_face}, "
            f"found {len(solutions)}"
        )
    step2 = solutions[0]
    if variant == "step2":
        return step2

    support = set(step2.support_qubits())
    pairing = [
        i for i in lat.blue_edges
        if all(q in support for q in lat.diag_edges[i].qubits)
    ]
    paired = {q for i in pairing for q in lat.diag_edges[i].qubits}
    if len(pairing) != 8 or paired != support:
        raise RuntimeError(f"blue edges fail to pair the zigzag support at {blue_face}")
    return product([step2] + [_diag_check(lat, i) for i in sorted(pairing)], n=n)


def extract_nonlocal_generators(isg: GeneratorSet, local: GeneratorSet) -> GeneratorSet:
    """Representatives of span(isg) modulo span(local).

    Every local generator must already lie in the group; the result is
    a basis of a complement, each element reduced against the local
    span so its support avoids the local pivots.
    """
    if isg.n != local.n:
        raise ValueError("qubit count mismatch")
    for g in local.ops():
        if not isg.in_span(g):
            raise ValueError("local generators must lie inside the group")
    acc = local.copy()
    out = GeneratorSet(isg.n)
    for g in isg.ops():
        red = acc.reduce(g)
        if red.vec:
            acc.add(g)
            out.add(red)
    return out


def find_outer_logicals(
    lat: Lattice,
    layer: tuple[str, int],
    direction: str,
    strip_width: int = 1,
) -> list[PauliOp]:
    """Homologically nontrivial Y-strings winding through one layer.

    Solves for all-Y operators supported on the tau-edge rows of a
    strip at transverse coordinate zero that commute with every
    plaquette stabilizer, then discards solutions realized as products
    of checks.  Class representatives are normalized to put the Y on
    the +tau arm of each crossed edge.
    """
    plane, coord = layer
    u, v = PLANE_AXES[plane]
    if direction not in (u, v):
        raise ValueError(f"direction {direction!r} is not an in-plane axis of {plane}")
    if not 1 <= strip_width <= lat.L:
        raise ValueError(f"strip_width must be in [1, {lat.L}]")
    tau = v if direction == u else u
    normal = PLANE_NORMAL[plane]
    L = lat.L

    def vertex(j, t):
        out = [0, 0, 0]
        out["xyz".index(direction)] = j % L
        out["xyz".index(tau)] = t % L
        out["xyz".index(normal)] = coord
        return tuple(out)

    cols: list[int] = []
    for t in range(strip_width):
        for j in range(L):
            cols.append(lat.qubit_index((vertex(j, t), "+" + tau), plane))
            cols.append(lat.qubit_index((vertex(j, t + 1), "-" + tau), plane))
    col_of = {q: i for i, q in enumerate(cols)}

    # an all-Y operator only fails to commute with the mixed-letter
    # octagon plaquettes, so evenness over their corners is the whole
    # constraint system
    rows = []
    for o in lat.octagons:
        if o.layer != (plane, coord):
            continue
        mask = 0
        for q in o.corner_qubits:
            if q in col_of:
                mask |= 1 << col_of[q]
        if mask:
            rows.append(mask)
    basis = kernel_basis(rows, len(cols))

    gauge = GeneratorSet(lat.n_qubits)
    for kind in CHECK_KINDS:
        for c in build_checks(lat, kind):
            gauge.add(c)

    def as_op(bits: int) -> PauliOp:
        return PauliOp.from_support(
            lat.n_qubits, {cols[i]: "Y" for i in range(len(cols)) if bits >> i & 1}
        )

    # combinations of kernel vectors realized by check products form the
    # trivial subspace; solve for them through the gauge residuals
    residuals = [gauge.reduce(as_op(b)).vec for b in basis]
    width = 2 * lat.n_qubits
    transpose = []
    for p in range(width):
        row = 0
        for i, r in enumerate(residuals):
            row |= (r >> p & 1) << i
        if row:
            transpose.append(row)
    trivial_combos = kernel_basis(transpose, len(basis))
    trivial = []
    for combo in trivial_combos:
        vecbits = 0
        for i in range(len(basis)):
            if combo >> i & 1:
                vecbits ^= basis[i]
        if vecbits:
            trivial.append(vecbits)

    reps = []
    accepted = list(trivial)
    for b in basis:
        if not in_rowspan(b, accepted):
            accepted.append(b)
            reps.append(b)

    canonical = []
    for bits in reps:
        for e in range(len(cols) // 2):
            lo, hi = 1 << (2 * e), 1 << (2 * e + 1)
            if bits & hi:
                bits ^= lo | hi
        if bits:
            canonical.append(bits)
    canonical = sorted(set(canonical))
    if not canonical:
        raise StripError(
            f"no nontrivial cycle in a width-{strip_width} strip of layer "
            f"{layer}; widen the strip"
        )
    return [as_op(bits) for bits in canonical]


def symplectic_partners(isg: GeneratorSet, outers: list[PauliOp]) -> list[PauliOp]:
    """Partners P_j in the centralizer of isg with <O_i, P_j> = delta_ij.

    The outer representatives must mutually commute.  Partners come
    back as phase-0 operators; their pairwise commutation is not
    constrained.
    """
    n = isg.n
    outs = [o.vec for o in outers]
    for i, a in enumerate(outs):
        for b in outs[i + 1:]:
            if sympl_vec(n, a, b):
                raise ValueError("outer representatives must mutually commute")
    pool = [p.vec for p in isg.centralizer_basis()]
    partners: list[int] = []
    for ov in outs:
        pick = next((i for i, w in enumerate(pool) if sympl_vec(n, w, ov)), None)
        if pick is None:
            raise ValueError("a representative has no anticommuting partner in the centralizer")
        vsel = pool.pop(pick)
        pool = [w ^ vsel if sympl_vec(n, w, ov) else w for w in pool]
        partners = [p ^ vsel if sympl_vec(n, p, ov) else p for p in partners]
        partners.append(vsel)
    for i, p in enumerate(partners):
        assert all(sympl_vec(n, p, outs[j]) == (i == j) for j in range(len(outs)))
    return [PauliOp.from_vec(n, p) for p in partners]


def translate_op(lat: Lattice, op: PauliOp, delta: tuple[int, int, int]) -> PauliOp:
    """Shift an operator by a lattice vector, preserving letters and phase."""
    letters = {}
    for q in op.support_qubits():
        v, arm, plane = lat.qubit_at(q)
        nv = tuple((v[i] + delta[i]) % lat.L for i in range(3))
        letters[lat.qubit_id[(nv, arm, plane)]] = op.letter_at(q)
    return PauliOp.from_support(lat.n_qubits, letters, phase=op.phase)
