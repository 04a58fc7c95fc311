"""Signed Pauli operators and GF(2) symplectic linear algebra.

Paulis on n qubits are stored as a pair of n-bit integers (x, z) plus a
power of i.  Bit q of x / z records an X / Z factor on qubit q, both bits
set meaning the Hermitian Y.  The stored operator is

    i**phase * prod_q L_q,   L_q in {I, X, Y, Z}

so an operator is Hermitian iff phase is 0 or 2, and every Hermitian
Pauli squares to +I.

GF(2) row vectors are plain Python ints used as bitsets.  A symplectic
vector packs x in the low n bits and z in the high n bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping


_LETTERS = ("I", "X", "Z", "Y")  # index = x_bit + 2*z_bit


def _parity(v: int) -> int:
    return v.bit_count() & 1


@dataclass(frozen=True, slots=True)
class PauliOp:
    """Immutable signed Pauli operator on ``n`` qubits."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self) -> None:
        mask = (1 << self.n) - 1
        object.__setattr__(self, "x", self.x & mask)
        object.__setattr__(self, "z", self.z & mask)
        object.__setattr__(self, "phase", self.phase & 3)

    # ---- constructors ----

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(n)

    @classmethod
    def from_string(cls, s: str, phase: int = 0) -> "PauliOp":
        """Parse ``"XIZY"`` style strings, qubit 0 first."""
        x = z = 0
        for q, c in enumerate(s):
            if c in ("X", "Y"):
                x |= 1 << q
            if c in ("Z", "Y"):
                z |= 1 << q
            if c not in "IXYZ":
                raise ValueError(f"bad Pauli letter {c!r}")
        return cls(len(s), x, z, phase)

    @classmethod
    def from_support(cls, n: int, letters: Mapping[int, str], phase: int = 0) -> "PauliOp":
        """Build from a map qubit -> letter, identity elsewhere."""
        x = z = 0
        for q, c in letters.items():
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            if c in ("X", "Y"):
                x |= 1 << q
            if c in ("Z", "Y"):
                z |= 1 << q
            if c not in "XYZ":
                raise ValueError(f"bad Pauli letter {c!r}")
        return cls(n, x, z, phase)

    @classmethod
    def single(cls, n: int, q: int, letter: str, phase: int = 0) -> "PauliOp":
        return cls.from_support(n, {q: letter}, phase)

    @classmethod
    def from_vec(cls, n: int, vec: int, phase: int = 0) -> "PauliOp":
        """Unpack a symplectic vector (x low bits, z high bits)."""
        mask = (1 << n) - 1
        return cls(n, vec & mask, vec >> n, phase)

    # ---- views ----

    @property
    def vec(self) -> int:
        return self.x | (self.z << self.n)

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0 and self.phase == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase & 1 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian operators."""
        if self.phase & 1:
            raise ValueError("operator has an imaginary prefactor")
        return 1 if self.phase == 0 else -1

    def letter_at(self, q: int) -> str:
        return _LETTERS[((self.x >> q) & 1) + 2 * ((self.z >> q) & 1)]

    def letters(self) -> str:
        return "".join(self.letter_at(q) for q in range(self.n))

    def support_qubits(self) -> list[int]:
        s = self.support
        out = []
        while s:
            low = s & -s
            out.append(low.bit_length() - 1)
            s ^= low
        return out

    def __str__(self) -> str:
        pre = ("+", "+i", "-", "-i")[self.phase]
        return pre + self.letters()

    # ---- algebra ----

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        x1, z1, x2, z2 = self.x, self.z, other.x, other.z
        # per-qubit letter classes
        ax, ay, az = x1 & ~z1, x1 & z1, z1 & ~x1
        bx, by, bz = x2 & ~z2, x2 & z2, z2 & ~x2
        # XY=iZ, YZ=iX, ZX=iY and the three reverses pick up -i
        plus = (ax & by) | (ay & bz) | (az & bx)
        minus = (ax & bz) | (ay & bx) | (az & by)
        phase = self.phase + other.phase + plus.bit_count() - minus.bit_count()
        return PauliOp(self.n, x1 ^ x2, z1 ^ z2, phase)

    def adjoint(self) -> "PauliOp":
        return PauliOp(self.n, self.x, self.z, -self.phase)

    inverse = adjoint  # Pauli letters are involutions, only the phase flips

    def negate(self) -> "PauliOp":
        return PauliOp(self.n, self.x, self.z, self.phase + 2)

    def overlap(self, other: "PauliOp") -> int:
        """Symplectic inner product in GF(2): 0 commute, 1 anticommute."""
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) & 1

    def commutes_with(self, other: "PauliOp") -> bool:
        return self.overlap(other) == 0

    def same_unsigned(self, other: "PauliOp") -> bool:
        return self.x == other.x and self.z == other.z


def sympl(a: PauliOp, b: PauliOp) -> int:
    return a.overlap(b)


def sympl_vec(n: int, va: int, vb: int) -> int:
    """Symplectic product of two packed vectors on n qubits."""
    mask = (1 << n) - 1
    xa, za = va & mask, va >> n
    xb, zb = vb & mask, vb >> n
    return ((xa & zb).bit_count() + (za & xb).bit_count()) & 1


def product(ops: Iterable[PauliOp], n: int | None = None) -> PauliOp:
    """Ordered product of a sequence of operators."""
    acc = None
    for op in ops:
        acc = op if acc is None else acc * op
    if acc is None:
        if n is None:
            raise ValueError("empty product needs an explicit qubit count")
        return PauliOp.identity(n)
    return acc


# ---------------------------------------------------------------------------
# GF(2) linear algebra on bitset rows
# ---------------------------------------------------------------------------


def rref_bits(rows: Iterable[int]) -> tuple[list[int], list[int]]:
    """Reduced row echelon form over GF(2).

    Returns (reduced_rows, pivot_cols), rows sorted by pivot column.
    Pivot of a row is its lowest set bit.
    """
    reduced: dict[int, int] = {}  # pivot col -> row
    for r in rows:
        r = _reduce_row(r, reduced)
        if r:
            p = (r & -r).bit_length() - 1
            for q, rq in list(reduced.items()):
                if (rq >> p) & 1:
                    reduced[q] = rq ^ r
            reduced[p] = r
    pivots = sorted(reduced)
    return [reduced[p] for p in pivots], pivots


def _reduce_row(r: int, reduced: Mapping[int, int]) -> int:
    for p, row in reduced.items():
        if (r >> p) & 1:
            r ^= row
    return r


def rank_bits(rows: Iterable[int]) -> int:
    return len(rref_bits(rows)[0])


def in_rowspan(r: int, rows: Iterable[int]) -> bool:
    reduced, pivots = rref_bits(rows)
    return _reduce_row(r, dict(zip(pivots, reduced))) == 0


def kernel_basis(rows: Iterable[int], width: int) -> list[int]:
    """Basis of {v : parity(row & v) = 0 for every row}.

    Vectors are bitsets of length ``width``.
    """
    reduced, pivots = rref_bits(rows)
    pivot_set = set(pivots)
    basis = []
    for f in range(width):
        if f in pivot_set:
            continue
        v = 1 << f
        for p, row in zip(pivots, reduced):
            if (row >> f) & 1:
                v |= 1 << p
        basis.append(v)
    return basis


def solve_bits(rows: list[int], rhs: list[int]) -> int | None:
    """Solve sum of selected columns = rhs, i.e. find v with
    parity(rows[i] & v) = rhs[i] for all i.  Returns one solution or None.
    """
    # eliminate on the augmented system
    aug: dict[int, tuple[int, int]] = {}  # pivot -> (row, b)
    for r, b in zip(rows, rhs):
        for p, (row, bb) in aug.items():
            if (r >> p) & 1:
                r ^= row
                b ^= bb
        if r:
            p = (r & -r).bit_length() - 1
            for q, (rq, bq) in list(aug.items()):
                if (rq >> p) & 1:
                    aug[q] = (rq ^ r, bq ^ b)
            aug[p] = (r, b)
        elif b:
            return None
    v = 0
    for p, (row, b) in aug.items():
        if b:
            v |= 1 << p
    # set pivot variables from free variables already fixed to 0
    return v


def commutation_matrix(ops: list[PauliOp], others: list[PauliOp] | None = None) -> list[int]:
    """Row i is the bitmask of which of ``others`` anticommute with ops[i].

    With others=None, computes the square matrix of ops against ops.
    """
    if others is None:
        others = ops
    out = []
    for a in ops:
        row = 0
        for j, b in enumerate(others):
            if a.overlap(b):
                row |= 1 << j
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# Generator sets
# ---------------------------------------------------------------------------


@dataclass
class _Row:
    vec: int
    op: PauliOp
    coeff: int  # bitmask over the original generator list


class GeneratorSet:
    """A Pauli subgroup kept in reduced echelon form.

    Each echelon row stores its GF(2) symplectic vector, an actual group
    element with that vector (so row operations track signs), and the
    coefficient mask over the originally supplied generators that
    realizes it.  For an abelian group of Hermitian generators the
    journaled elements stay Hermitian and membership is sign-exact; for
    non-abelian collections only unsigned span queries are meaningful.
    """

    def __init__(self, n: int, ops: Iterable[PauliOp] = ()):  # noqa: D107
        self.n = n
        self._rows: dict[int, _Row] = {}  # pivot -> row
        self._gens: list[PauliOp] = []  # everything ever offered to add()
        for op in ops:
            self.add(op)

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def generators(self) -> list[PauliOp]:
        """The original generator list, including dependent entries."""
        return list(self._gens)

    def copy(self) -> "GeneratorSet":
        g = GeneratorSet(self.n)
        g._rows = {p: _Row(r.vec, r.op, r.coeff) for p, r in self._rows.items()}
        g._gens = list(self._gens)
        return g

    def ops(self) -> list[PauliOp]:
        return [self._rows[p].op for p in sorted(self._rows)]

    def vecs(self) -> list[int]:
        return [self._rows[p].vec for p in sorted(self._rows)]

    def _reduce(self, op: PauliOp, coeff: int) -> tuple[PauliOp, int]:
        vec = op.vec
        acc = op
        for p in sorted(self._rows):
            if (vec >> p) & 1:
                row = self._rows[p]
                vec ^= row.vec
                acc = acc * row.op
                coeff ^= row.coeff
        return acc, coeff

    def reduce(self, op: PauliOp) -> PauliOp:
        """Divide out the row span.  Residual vec is 0 iff op is in the
        unsigned span; the residual then carries the relative sign."""
        return self._reduce(op, 0)[0]

    def add(self, op: PauliOp) -> bool:
        """Insert a generator.  Returns True if the span grew."""
        if op.n != self.n:
            raise ValueError("qubit count mismatch")
        mark = 1 << len(self._gens)
        self._gens.append(op)
        red, coeff = self._reduce(op, mark)
        if red.vec == 0:
            return False
        p = (red.vec & -red.vec).bit_length() - 1
        # back-substitute to keep rows fully reduced
        for q, row in list(self._rows.items()):
            if (row.vec >> p) & 1:
                self._rows[q] = _Row(row.vec ^ red.vec, row.op * red, row.coeff ^ coeff)
        self._rows[p] = _Row(red.vec, red, coeff)
        return True

    def membership(self, op: PauliOp, sign_aware: bool = False):
        """Coefficient mask over the original generators expressing op's
        bitvector, or None when outside the span.  With sign_aware, a
        (mask, sign) pair where sign is +1 / -1 for op / -op being the
        realized product (meaningful for abelian Hermitian groups)."""
        red, coeff = self._reduce(op, 0)
        if red.vec != 0:
            return None
        if not sign_aware:
            return coeff
        return coeff, red.sign

    def in_span(self, op: PauliOp) -> bool:
        return self.reduce(op).vec == 0

    def sign_of(self, op: PauliOp) -> int | None:
        """For abelian Hermitian groups: +1 if op is in the group, -1 if
        -op is, None if the vector is outside the span."""
        red = self.reduce(op)
        if red.vec != 0:
            return None
        return red.sign

    def contains(self, op: PauliOp) -> bool:
        red = self.reduce(op)
        return red.vec == 0 and red.phase == 0

    def contains_all(self, ops: Iterable[PauliOp]) -> bool:
        return all(self.in_span(op) for op in ops)

    def same_span(self, other: "GeneratorSet") -> bool:
        return (
            self.rank == other.rank
            and all(other.in_span(op) for op in self.ops())
        )

    def __iter__(self) -> Iterator[PauliOp]:
        return iter(self.ops())

    def centralizer_basis(self) -> list[PauliOp]:
        """Basis (phase 0) of all Paulis commuting with every element.

        The commutation constraint for v=(vx, vz) against a row (x, z)
        is parity(z & vx) + parity(x & vz) = 0, so the constraint row in
        packed form is z | (x << n).
        """
        cons = [row.op.z | (row.op.x << self.n) for row in self._rows.values()]
        return [PauliOp.from_vec(self.n, v) for v in kernel_basis(cons, 2 * self.n)]

    def commutant_intersection_rank(self, other: "GeneratorSet") -> int:
        """Rank of span(self) intersected with the centralizer of other."""
        probe = GeneratorSet(self.n)
        for v in _isotropic_part(self.vecs(), other.vecs(), self.n):
            probe.add(PauliOp.from_vec(self.n, v))
        return probe.rank


def _isotropic_part(vecs: list[int], against: list[int], n: int) -> list[int]:
    """Vectors in span(vecs) commuting with everything in ``against``."""
    # coefficients c over vecs with sum_i c_i sympl(vecs[i], a) = 0 for all a
    k = len(vecs)
    cons = []
    for a in against:
        row = 0
        for i, v in enumerate(vecs):
            if sympl_vec(n, v, a):
                row |= 1 << i
        cons.append(row)
    out = []
    for c in kernel_basis(cons, k):
        v = 0
        i = 0
        while c:
            if c & 1:
                v ^= vecs[i]
            c >>= 1
            i += 1
        out.append(v)
    return out


# Contract-level aliases: the operation names the rest of the package and
# external callers use.

def symplectic_product(p: PauliOp, q: PauliOp) -> int:
    if p.n != q.n:
        raise ValueError("qubit count mismatch")
    return p.overlap(q)


def pauli_multiply(p: PauliOp, q: PauliOp) -> PauliOp:
    return p * q


def gf2_rank(gens: GeneratorSet) -> int:
    return gens.rank


def span_membership(gens: GeneratorSet, target: PauliOp, sign_aware: bool = False):
    return gens.membership(target, sign_aware)


def centralizer_basis(inner: GeneratorSet, outer: GeneratorSet) -> GeneratorSet:
    """Basis of {g in span(inner) : g commutes with every generator of outer}."""
    if inner.n != outer.n:
        raise ValueError("qubit count mismatch")
    out = GeneratorSet(inner.n)
    for v in _isotropic_part(inner.vecs(), outer.vecs(), inner.n):
        out.add(PauliOp.from_vec(inner.n, v))
    return out


# ---------------------------------------------------------------------------
# Sparse text form
# ---------------------------------------------------------------------------


def to_text(op: PauliOp) -> str:
    """Serialize a Hermitian PauliOp: optional leading '-', then
    space-separated q<index>:<letter> tokens.  Identity is ''."""
    if op.phase & 1:
        raise ValueError("text form is for Hermitian operators")
    toks = [f"q{q}:{op.letter_at(q)}" for q in op.support_qubits()]
    if op.phase == 2:
        toks.insert(0, "-")
    return " ".join(toks)


def from_text(n: int, text: str) -> PauliOp:
    toks = text.split()
    phase = 0
    if toks and toks[0] == "-":
        phase = 2
        toks = toks[1:]
    letters = {}
    for t in toks:
        if not t.startswith("q") or ":" not in t:
            raise ValueError(f"bad token {t!r}")
        qs, letter = t[1:].split(":", 1)
        letters[int(qs)] = letter
    return PauliOp.from_support(n, letters, phase)


def group_dims(gauge: GeneratorSet) -> tuple[int, int, int]:
    """(gauge rank, center rank, logical qubit count) for a gauge group.

    The center is span(G) intersected with its own centralizer.  The
    number of logical qubits k satisfies 2k = 2n - rank(G) - rank(Z(G)).
    """
    r = gauge.rank
    z = gauge.commutant_intersection_rank(gauge)
    n = gauge.n
    two_k = 2 * n - r - z
    if two_k & 1:
        raise ValueError("inconsistent group dimensions")
    return r, z, two_k // 2
