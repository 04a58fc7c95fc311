"""Restricted noise, plaquette detectors, and a matching decoder.

Error model: after each round, every qubit independently suffers with
probability p the Pauli matching the letter of the check just measured
on it (Y after a yellow or on-site round, the blue-side letter after a
blue round, the green-side letter after a green round).  Measurements
themselves are perfect; a faulty readout is equivalent to that same
Pauli inserted both before and after the round, which flips the one
outcome and nothing else.

Detectors compare reconstructions of a plaquette across the cycle.
Each reconstruction multiplies check outcomes from two adjacent rounds:
a blue octagon combines its four yellow edges with its four green
diagonals, a green octagon its four yellow edges with its four blue
diagonals, and a square its two green sides with its two blue sides,
so the cycle infers blue, green, yellow, blue, green, yellow plaquette
values in turn (squares playing the yellow role).  Each reconstruction
is compared against its predecessor; the earliest, inferred during the
initialization rounds, anchors the chain and emits nothing, since its
value is genuinely random.  On-site outcomes enter no reconstruction:
the three canonical decompositions above do not involve them, and
adding them would tie detectors across intersecting layers.

A single data error flips exactly two detectors in the qubit's own
layer, so decoding runs minimum-weight perfect matching independently
per layer over a graph whose edges are the single-error mechanisms.

Logical bookkeeping is round-resolved: applying a stabilizer of the
moment's group is a physical no-op, so the same Pauli can be harmless
after one round and a logical flip after another.  The tracker pulls
the final representatives backward through every measurement round,
and every error or matched correction is judged against the
representative of its own round.
"""

from __future__ import annotations

import math
import time
from collections import defaultdict
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .analysis import _step_local_families
from .isg import Round, Schedule, canonical_schedule, run_schedule
from .lattice import Lattice, build_lattice
from .operators import extract_nonlocal_generators
from .symplectic import GeneratorSet, PauliOp, solve_bits, sympl_vec

LETTER_OF_BITS = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}

# constituent round kinds per plaquette color, in cycle order (the kind
# measured later, then earlier).  Any adjacent pair of rounds covering
# both kinds reconstructs the plaquette; the cycle always presents this
# order, the four init rounds present each pair once reversed, which is
# what anchors the first in-cycle comparison to a measured value.
RECON_PATTERN = {
    "blue": ("yellow", "green"),
    "green": ("blue", "yellow"),
    "yellow": ("green", "blue"),
}


class WindowError(ValueError):
    """The trace is too short to infer every plaquette twice."""


class MalformedSyndromeError(ValueError):
    """Odd defect parity in a layer; no perfect matching exists."""


@dataclass(frozen=True)
class ErrorEvent:
    """One Pauli striking right after ``round``'s measurements."""

    round: int
    qubit: int
    pauli: str


@dataclass(frozen=True)
class Detector:
    layer: tuple[str, int]
    plaquette: str
    inference_round: int
    value: int


def _round_kind(label: str) -> str:
    base = label.rsplit(":", 1)[-1]
    return "yellow" if base.startswith("yellow") else base


def _letter_masks(rounds: list[Round]) -> list[tuple[int, int]]:
    """Per round: x and z bitmasks giving each qubit's check letter.

    Every qubit must be covered, and all checks of a round touching a
    qubit must act on it with one letter; both hold for the canonical
    schedule (the on-site block is Y like the yellow edges it rides
    with) and are validated here for anything else.
    """
    out: list[tuple[int, int]] = []
    cache: dict[int, tuple[int, int]] = {}
    for rnd in rounds:
        key = id(rnd.checks)
        hit = cache.get(key)
        if hit is None:
            n = rnd.checks[0].n
            full = (1 << n) - 1
            xm = zm = cover = 0
            for c in rnd.checks:
                xm |= c.x
                zm |= c.z
                cover |= c.support
            if cover != full:
                raise ValueError(f"round {rnd.label!r} leaves qubits unmeasured")
            for c in rnd.checks:
                if (xm & c.support) != c.x or (zm & c.support) != c.z:
                    raise ValueError(f"round {rnd.label!r} mixes letters on a qubit")
            hit = cache[key] = (xm, zm)
        out.append(hit)
    return out


def allowed_letter(rounds: list[Round], r: int, q: int) -> str:
    xm, zm = _letter_masks([rounds[r]])[0]
    return LETTER_OF_BITS[(xm >> q & 1, zm >> q & 1)]


def sample_errors(rng, p: float, rounds: list[Round]) -> list[ErrorEvent]:
    """Independent Bernoulli(p) per qubit per round, restricted letters."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    events: list[ErrorEvent] = []
    if not rounds or p == 0.0:
        return events
    n = rounds[0].checks[0].n
    masks = _letter_masks(rounds)
    for r, (xm, zm) in enumerate(masks):
        for q in np.flatnonzero(rng.random(n) < p):
            q = int(q)
            events.append(ErrorEvent(r, q, LETTER_OF_BITS[(xm >> q & 1, zm >> q & 1)]))
    return events


def error_pauli(n: int, events: list[ErrorEvent]) -> PauliOp:
    vec = 0
    for ev in events:
        vec ^= PauliOp.single(n, ev.qubit, ev.pauli).vec
    return PauliOp.from_vec(n, vec)


@dataclass
class ErrorTrace:
    """Outcome record of a noisy run next to its noiseless reference."""

    lat: Lattice
    rounds: list[Round]
    prefix_length: int
    reference: list[tuple[int, ...]]
    outcomes: list[tuple[int, ...]]
    flips: list[int]  # per round, bitmask over check positions
    frame: PauliOp  # cumulative error after the last round
    events: list[ErrorEvent]


def simulate_with_errors(
    lat: Lattice,
    schedule: Schedule | None,
    errors: list[ErrorEvent],
    cycles: int,
) -> ErrorTrace:
    """Replay the forced_plus reference with a growing Pauli frame.

    A check outcome flips iff it anticommutes with the frame at its
    measurement time; the frame itself is never altered by measuring.
    Events are applied verbatim, so off-model letters are allowed (that
    is what encodes a measurement error as a before/after pair).
    """
    if schedule is None:
        schedule = canonical_schedule(lat)
    ref = run_schedule(lat, schedule, cycles=cycles, snapshots="none")
    rounds = list(ref.rounds)
    n = lat.n_qubits
    by_round: dict[int, list[ErrorEvent]] = defaultdict(list)
    for ev in errors:
        if not 0 <= ev.round < len(rounds):
            raise ValueError(f"event round {ev.round} outside the trace")
        if not 0 <= ev.qubit < n:
            raise ValueError(f"event qubit {ev.qubit} outside the lattice")
        if ev.pauli not in "XYZ":
            raise ValueError(f"event letter must be X, Y or Z, got {ev.pauli!r}")
        by_round[ev.round].append(ev)

    fx = fz = 0
    reference, outcomes, flips = [], [], []
    for idx, rnd in enumerate(rounds):
        refout = ref.entry(idx).outcomes
        mask = 0
        outs = list(refout)
        for pos, c in enumerate(rnd.checks):
            if ((fx & c.z).bit_count() ^ (fz & c.x).bit_count()) & 1:
                mask |= 1 << pos
                outs[pos] = -outs[pos]
        reference.append(refout)
        outcomes.append(tuple(outs))
        flips.append(mask)
        for ev in by_round.get(idx, ()):
            hit = PauliOp.single(n, ev.qubit, ev.pauli)
            fx ^= hit.x
            fz ^= hit.z
    frame = PauliOp.from_vec(n, fx | (fz << n))
    return ErrorTrace(
        lat, rounds, ref.prefix_length, reference, outcomes, flips, frame,
        sorted(errors, key=lambda e: (e.round, e.qubit)),
    )


@dataclass(frozen=True)
class _Plaq:
    key: str
    layer: tuple[str, int]
    color: str
    kind_ops: dict[str, tuple[PauliOp, ...]]  # constituent checks per round kind
    kind_mask: dict[str, int]  # outcome positions within that kind's rounds


@dataclass(frozen=True)
class InferenceTable:
    """Rounds at which each plaquette color is reconstructible."""

    by_color: dict[str, list[int]]
    kinds: tuple[str, ...]  # round kind per trace index

    def __getitem__(self, color: str) -> list[int]:
        return self.by_color[color]

    def items(self):
        return self.by_color.items()


class DetectorSchedule:
    """Reconstruction tables binding plaquettes to outcome positions."""

    def __init__(self, lat: Lattice):
        self.lat = lat
        self.n = lat.n_qubits
        blue_pos = {di: k for k, di in enumerate(lat.blue_edges)}
        green_pos = {di: k for k, di in enumerate(lat.green_edges)}
        plaqs: list[_Plaq] = []

        def check(i):
            e = lat.diag_edges[i]
            return PauliOp.from_support(self.n, {q: e.ptype for q in e.qubits})

        def yellow(i):
            e = lat.yellow_edges[i]
            return PauliOp.from_support(self.n, {q: "Y" for q in e.qubits})

        for o in lat.octagons:
            ys = [i for kind, i in o.boundary if kind == "y"]
            ds = [i for kind, i in o.boundary if kind == "d"]
            yellow_ops = tuple(yellow(i) for i in ys)
            diag_ops = tuple(check(i) for i in ds)
            ymask = sum(1 << i for i in ys)
            if o.color == "blue":  # boundary diagonals are green
                dmask = sum(1 << green_pos[i] for i in ds)
                plaqs.append(_Plaq(
                    f"oct{o.index}", o.layer, "blue",
                    {"yellow": yellow_ops, "green": diag_ops},
                    {"yellow": ymask, "green": dmask},
                ))
            else:
                dmask = sum(1 << blue_pos[i] for i in ds)
                plaqs.append(_Plaq(
                    f"oct{o.index}", o.layer, "green",
                    {"blue": diag_ops, "yellow": yellow_ops},
                    {"blue": dmask, "yellow": ymask},
                ))
        for d in lat.diamonds:
            blues = [i for i in d.sides if lat.diag_edges[i].color == "blue"]
            greens = [i for i in d.sides if lat.diag_edges[i].color == "green"]
            plaqs.append(_Plaq(
                f"sq{d.index}", d.layer, "yellow",
                {
                    "green": tuple(check(i) for i in greens),
                    "blue": tuple(check(i) for i in blues),
                },
                {
                    "green": sum(1 << green_pos[i] for i in greens),
                    "blue": sum(1 << blue_pos[i] for i in blues),
                },
            ))
        self.plaqs = plaqs
        self.by_key = {p.key: p for p in plaqs}

        touching: dict[int, list[int]] = defaultdict(list)
        for i, p in enumerate(plaqs):
            qs = set()
            for ops in p.kind_ops.values():
                for op in ops:
                    qs.update(op.support_qubits())
            for q in qs:
                touching[q].append(i)
        self.touching = {q: tuple(v) for q, v in touching.items()}

    def recon_rounds(self, rounds: list[Round]) -> InferenceTable:
        """Rounds whose (previous, own) kinds cover each color's pair.

        The first entry per color is the anchor: it fixes the measured
        plaquette value the next reconstruction is compared against, and
        emits no detector itself.
        """
        kinds = tuple(_round_kind(r.label) for r in rounds)
        out: dict[str, list[int]] = {c: [] for c in RECON_PATTERN}
        for s in range(1, len(kinds)):
            pair = {kinds[s], kinds[s - 1]}
            for color, constituents in RECON_PATTERN.items():
                if pair == set(constituents):
                    out[color].append(s)
        return InferenceTable(out, kinds)

    def require_window(self, recon: InferenceTable) -> None:
        for color, rs in recon.items():
            if len(rs) < 2:
                raise WindowError(
                    f"only {len(rs)} {color} inference rounds in the trace; "
                    "need an anchor plus at least one comparison"
                )

    def detectors_from_flips(
        self, rounds: list[Round], flips: list[int]
    ) -> list[Detector]:
        """All fired detectors of a trace given its outcome flip masks."""
        recon = self.recon_rounds(rounds)
        self.require_window(recon)
        kinds = recon.kinds
        fired: list[Detector] = []
        for p in self.plaqs:
            prev = None
            for s in recon[p.color]:
                bit = (
                    (flips[s] & p.kind_mask[kinds[s]]).bit_count()
                    + (flips[s - 1] & p.kind_mask[kinds[s - 1]]).bit_count()
                ) & 1
                if prev is not None and bit ^ prev:
                    fired.append(Detector(p.layer, p.key, s, 1))
                prev = bit
        return fired

    def mechanism_events(
        self,
        recon: InferenceTable,
        r: int,
        q: int,
        letter: str,
    ) -> tuple[tuple[str, int], ...]:
        """Detector nodes fired by a single Pauli after round r.

        Linear in the error, so a whole event set fires the symmetric
        difference of its members' node sets.
        """
        evec = PauliOp.single(self.n, q, letter).vec
        kinds = recon.kinds
        out: list[tuple[str, int]] = []
        for pi in self.touching.get(q, ()):
            p = self.plaqs[pi]
            prev = None
            settled = False
            for s in recon[p.color]:
                if s - 1 > r and settled:
                    break  # both constituents past the error: constant now
                bit = 0
                if s > r:
                    for op in p.kind_ops[kinds[s]]:
                        bit ^= sympl_vec(self.n, op.vec, evec)
                if s - 1 > r:
                    for op in p.kind_ops[kinds[s - 1]]:
                        bit ^= sympl_vec(self.n, op.vec, evec)
                    settled = True
                if prev is not None and bit ^ prev:
                    out.append((p.key, s))
                prev = bit
        return tuple(out)


def extract_detectors(
    trace: ErrorTrace, tables: DetectorSchedule | None = None
) -> list[Detector]:
    """Fired detectors of a noisy trace; an error-free trace gives none."""
    if tables is None:
        tables = DetectorSchedule(trace.lat)
    return tables.detectors_from_flips(trace.rounds, trace.flips)


@dataclass
class DecodingGraph:
    layer: tuple[str, int]
    p: float
    n_qubits: int
    graph: nx.Graph  # nodes (plaquette key, inference round)
    noisy_rounds: int

    @property
    def nodes(self):
        return list(self.graph.nodes)


def _edge_weight(p: float, k: int) -> tuple[float, float]:
    # k parallel mechanisms act like one flip channel of probability p_eff
    p_eff = 0.5 * (1.0 - (1.0 - 2.0 * p) ** k)
    return p_eff, math.log((1.0 - p_eff) / p_eff)


def build_decoding_graph(
    lat: Lattice,
    layer: tuple[str, int],
    p: float,
    window: int,
    tables: DetectorSchedule | None = None,
    schedule: Schedule | None = None,
) -> DecodingGraph:
    """Single-error mechanisms of one layer as a weighted matching graph.

    ``window`` counts the noisy cycles; traces to decode against it must
    run window + 1 cycles so the final cycle terminates every detector.
    The four init rounds are noiseless encoding and contribute no
    mechanisms, only the anchor values of the first comparisons.  Every
    mechanism must fire exactly two detectors of this layer, which is
    checked during enumeration.
    """
    if not 0.0 < p <= 0.5:
        raise ValueError(f"p must lie in (0, 0.5], got {p}")
    if window < 1:
        raise ValueError("window must cover at least one cycle")
    if tables is None:
        tables = DetectorSchedule(lat)
    if schedule is None:
        schedule = canonical_schedule(lat)
    rounds = schedule.rounds(window + 1)
    noisy = len(schedule.rounds(window))
    prefix = len(schedule.prefix)
    recon = tables.recon_rounds(rounds)
    tables.require_window(recon)

    g = nx.Graph()
    for pq in tables.plaqs:
        if pq.layer != layer:
            continue
        for s in recon[pq.color][1:]:  # first inference is the anchor
            g.add_node((pq.key, s))
    node_set = set(g.nodes)

    masks = _letter_masks(rounds[:noisy])
    qubits = lat.layer_members(layer)["qubits"]
    pairs: dict[frozenset, list[tuple[int, int, str]]] = defaultdict(list)
    for r in range(prefix, noisy):
        xm, zm = masks[r]
        for q in qubits:
            letter = LETTER_OF_BITS[(xm >> q & 1, zm >> q & 1)]
            events = tables.mechanism_events(recon, r, q, letter)
            if len(events) != 2 or any(e not in node_set for e in events):
                raise RuntimeError(
                    f"mechanism round={r} qubit={q} fires {events}; expected "
                    f"two detectors inside layer {layer}"
                )
            pairs[frozenset(events)].append((r, q, letter))

    for pair, mechs in pairs.items():
        a, b = tuple(pair)
        p_eff, w = _edge_weight(p, len(mechs))
        g.add_edge(a, b, weight=w, p_eff=p_eff, mechanisms=tuple(sorted(mechs)))
    return DecodingGraph(layer, p, lat.n_qubits, g, noisy)


def match_mechanisms(
    graph: DecodingGraph, events
) -> tuple[tuple[int, int, str], ...]:
    """Minimum-weight perfect matching over graph geodesics.

    Accepts Detector records or bare (plaquette, inference round) nodes;
    returns one representative mechanism per edge of the matched paths.
    The rounds matter: a correction is the hypothesis that these
    mechanisms fired, and its logical effect is judged per round.
    """
    defects = []
    for e in events:
        node = (e.plaquette, e.inference_round) if isinstance(e, Detector) else e
        if node not in graph.graph:
            raise ValueError(f"detector {node} is not a node of the layer graph")
        defects.append(node)
    if not defects:
        return ()
    if len(defects) % 2:
        raise MalformedSyndromeError(
            f"{len(defects)} defects in layer {graph.layer}"
        )

    dist = {}
    path = {}
    for d in set(defects):
        dist[d], path[d] = nx.single_source_dijkstra(graph.graph, d)

    # the layer graph splits into independent sectors; every mechanism
    # toggles two nodes of one sector, so defects pair within sectors
    complete = nx.Graph()
    complete.add_nodes_from(defects)
    for i, a in enumerate(defects):
        for b in defects[i + 1:]:
            if b in dist[a]:
                complete.add_edge(a, b, weight=dist[a][b])
    matching = nx.min_weight_matching(complete)
    if 2 * len(matching) != len(defects):
        raise MalformedSyndromeError(
            f"defects in layer {graph.layer} admit no perfect matching"
        )

    out: list[tuple[int, int, str]] = []
    for a, b in matching:
        walk = path[a][b]
        for u, v in zip(walk, walk[1:]):
            out.append(graph.graph.edges[u, v]["mechanisms"][0])
    return tuple(out)


def decode(graph: DecodingGraph, events) -> PauliOp:
    """Matched correction collapsed to a Pauli on the full qubit set."""
    n = graph.n_qubits
    vec = 0
    for r, q, letter in match_mechanisms(graph, events):
        vec ^= PauliOp.single(n, q, letter).vec
    return PauliOp.from_vec(n, vec)


def logical_representatives(group: GeneratorSet) -> list[PauliOp]:
    """Basis of the centralizer modulo the group itself."""
    acc = group.copy()
    out = []
    for c in group.centralizer_basis():
        red = acc.reduce(c)
        if red.vec:
            acc.add(red)
            out.append(red)
    return out


class LogicalTracker:
    """Round-resolved representatives of the final logical classes.

    A Pauli error applied right after round r must be weighed against a
    representative valid at that moment: the same operator can be an
    element of the instantaneous group there (a physical no-op) yet
    anticommute with the final representative.  Pulling each final
    representative backward, round by round, absorbs a group element of
    the later round whenever the earlier group would see it; recorded
    outcomes make that absorption free.

    The pullback is not unique, but any two choices differ by operators
    whose disagreement on a fault set is a sum of detector bits, so flip
    masks agree on every undetectable set, which is the only place they
    are used.
    """

    def __init__(self, trace):
        entries = trace.entries
        if any(e.isg is None for e in entries):
            raise ValueError("tracker needs a trace recorded with snapshots='all'")
        self.n = trace.n
        last = len(entries) - 1
        self.final = logical_representatives(entries[last].isg.group)
        self.classes = len(self.final)
        cur = [rep.vec for rep in self.final]
        table: list[tuple[int, ...]] = [()] * (last + 1)
        table[last] = tuple(cur)
        for s in range(last - 1, -1, -1):
            gs = entries[s].isg.group.vecs()
            rows = None
            hs = None
            for k, v in enumerate(cur):
                rhs = [sympl_vec(self.n, v, g) for g in gs]
                if not any(rhs):
                    continue
                if rows is None:
                    hs = entries[s + 1].isg.group.vecs()
                    rows = []
                    for g in gs:
                        row = 0
                        for j, h in enumerate(hs):
                            if sympl_vec(self.n, h, g):
                                row |= 1 << j
                        rows.append(row)
                alpha = solve_bits(rows, rhs)
                if alpha is None:
                    raise RuntimeError(
                        f"logical class {k} has no representative at round {s}"
                    )
                while alpha:
                    j = (alpha & -alpha).bit_length() - 1
                    v ^= hs[j]
                    alpha &= alpha - 1
                cur[k] = v
            table[s] = tuple(cur)
        self._table = table

    @property
    def last(self) -> int:
        return len(self._table) - 1

    def rep_vec(self, r: int, k: int) -> int:
        return self._table[r][k]

    def flip_bits(self, r: int, evec: int) -> int:
        """Mask over classes flipped by a Pauli applied just after round r."""
        bits = 0
        for k, v in enumerate(self._table[r]):
            if sympl_vec(self.n, v, evec):
                bits |= 1 << k
        return bits

    def mechanism_bits(self, mech: tuple[int, int, str]) -> int:
        r, q, letter = mech
        return self.flip_bits(r, PauliOp.single(self.n, q, letter).vec)


@dataclass(frozen=True)
class MonteCarloResult:
    L: int
    p: float
    cycles: int
    trials: int
    failures: int
    seed: int

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def stderr(self) -> float:
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.trials)

    def record(self) -> str:
        return (
            f"{self.L} {self.p:g} {self.trials} {self.failures} "
            f"{self.rate:.6e} {self.stderr:.6e} {self.seed}"
        )


def run_montecarlo(
    L: int, p: float, cycles: int, trials: int, seed: int
) -> MonteCarloResult:
    """Sample, decode, and count logical failures.

    A trial fails when the error events and the matched correction
    mechanisms, each judged against the tracked representative of its
    own round, flip some logical class an odd number of times in total.
    Errors strike during the ``cycles`` cycles after the init rounds;
    initialization and the closing cycle are noiseless (encoding and
    readout).  Trial t draws from an independent stream seeded
    (seed, t).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    lat = build_lattice(L)
    schedule = canonical_schedule(lat)
    trace = run_schedule(lat, schedule, cycles=cycles + 1, snapshots="all")
    tracker = LogicalTracker(trace)
    rounds = list(trace.rounds)
    noisy = len(schedule.rounds(cycles))
    n = lat.n_qubits

    if p == 0.0:
        return MonteCarloResult(L, p, cycles, trials, 0, seed)

    tables = DetectorSchedule(lat)
    recon = tables.recon_rounds(rounds)
    graphs = {
        lk: build_decoding_graph(lat, lk, p, cycles, tables, schedule)
        for lk in lat.layers
    }
    sig_cache: dict[tuple[int, int, str], tuple[tuple, int]] = {}

    def signature(key: tuple[int, int, str]) -> tuple[tuple, int]:
        hit = sig_cache.get(key)
        if hit is None:
            hit = sig_cache[key] = (
                tables.mechanism_events(recon, *key),
                tracker.mechanism_bits(key),
            )
        return hit

    prefix = len(schedule.prefix)
    masks = _letter_masks(rounds[:noisy])
    failures = 0
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        fired: set[tuple[str, int]] = set()
        fbits = 0
        for r in range(prefix, noisy):
            xm, zm = masks[r]
            for q in np.flatnonzero(rng.random(n) < p):
                q = int(q)
                letter = LETTER_OF_BITS[(xm >> q & 1, zm >> q & 1)]
                sig, bits = signature((r, q, letter))
                fired.symmetric_difference_update(sig)
                fbits ^= bits
        by_layer: dict[tuple[str, int], list] = defaultdict(list)
        for node in fired:
            by_layer[tables.by_key[node[0]].layer].append(node)
        for lk, nodes in by_layer.items():
            for mech in match_mechanisms(graphs[lk], nodes):
                fbits ^= signature(mech)[1]
        if fbits:
            failures += 1
    return MonteCarloResult(L, p, cycles, trials, failures, seed)


@dataclass
class AuditReport:
    """Exhaustive single-error sweep against the two-detector law."""

    mechanisms: int
    two_events: bool
    same_layer: bool
    spacing: bool  # events at inference rounds r+1 and r+3
    decoded: bool
    failures: list[str]
    elapsed: float

    @property
    def ok(self) -> bool:
        return self.two_events and self.same_layer and self.spacing and self.decoded


def single_error_audit(lat: Lattice, window: int = 3, p: float = 1e-3) -> AuditReport:
    """Check every (round, qubit) error over ``window`` noisy cycles.

    Each must fire exactly two detectors, both in the qubit's layer, at
    inference rounds r+1 and r+3 exactly, and the matched correction
    must cancel the error's logical flips, with both sides judged
    against the tracked representative of their own round.  The noisy
    rounds are the cycle rounds; the init rounds are encoding and the
    extra trailing cycle terminates the last detectors.
    """
    t0 = time.monotonic()
    schedule = canonical_schedule(lat)
    rounds = schedule.rounds(window + 1)
    noisy = len(schedule.rounds(window))
    prefix = len(schedule.prefix)
    tables = DetectorSchedule(lat)
    recon = tables.recon_rounds(rounds)
    tables.require_window(recon)
    graphs = {
        lk: build_decoding_graph(lat, lk, p, window, tables, schedule)
        for lk in lat.layers
    }
    trace = run_schedule(lat, schedule, cycles=window + 1, snapshots="all")
    tracker = LogicalTracker(trace)
    n = lat.n_qubits

    masks = _letter_masks(rounds[:noisy])
    failures: list[str] = []
    two = same = spacing = decoded = True
    for r in range(prefix, noisy):
        xm, zm = masks[r]
        for q in range(n):
            letter = LETTER_OF_BITS[(xm >> q & 1, zm >> q & 1)]
            events = tables.mechanism_events(recon, r, q, letter)
            tag = f"round={r} qubit={q} {letter}"
            if len(events) != 2:
                two = False
                failures.append(f"{tag}: {len(events)} events")
                continue
            lk = lat.qubit_layer(q)
            if any(tables.by_key[k].layer != lk for k, _ in events):
                same = False
                failures.append(f"{tag}: events leave layer {lk}")
                continue
            if {s for _, s in events} != {r + 1, r + 3}:
                spacing = False
                failures.append(f"{tag}: events at {sorted(s for _, s in events)}")
                continue
            fbits = tracker.mechanism_bits((r, q, letter))
            for mech in match_mechanisms(graphs[lk], list(events)):
                fbits ^= tracker.mechanism_bits(mech)
            if fbits:
                decoded = False
                failures.append(f"{tag}: correction leaves logical flips")
    return AuditReport(
        (noisy - prefix) * n, two, same, spacing, decoded,
        failures[:20], time.monotonic() - t0,
    )


@dataclass(frozen=True)
class FaultDistanceResult:
    max_weight: int
    found: int | None
    witness: tuple[tuple[int, int, str], ...] | None
    mechanisms: int

    def marker(self) -> str:
        return str(self.found) if self.found is not None else f"> {self.max_weight}"


def fault_distance(lat: Lattice, max_weight: int) -> FaultDistanceResult:
    """Smallest undetectable restricted error set flipping a logical.

    Exhausts sets of up to max_weight mechanisms drawn from two
    consecutive cycles of a four-cycle window (time translation makes
    that band representative), demanding zero fired detectors and an
    odd total flip of some logical class, each mechanism judged at its
    own round.  Weights beyond 4 are out of reach of this enumeration.
    """
    if max_weight < 0:
        raise ValueError("max_weight must be nonnegative")
    if max_weight > 4:
        raise ValueError("enumeration supports max_weight <= 4")
    schedule = canonical_schedule(lat)
    window = 4
    rounds = schedule.rounds(window)
    prefix = len(schedule.prefix)
    period = len(schedule.cycle)
    tables = DetectorSchedule(lat)
    recon = tables.recon_rounds(rounds)
    trace = run_schedule(lat, schedule, cycles=window, snapshots="all")
    tracker = LogicalTracker(trace)
    n = lat.n_qubits

    lo, hi = prefix + period, prefix + 3 * period
    masks = _letter_masks(rounds[lo:hi])
    mechs: list[tuple[int, int, str]] = []
    sigs: list[frozenset] = []
    fbits: list[int] = []
    for off, (xm, zm) in enumerate(masks):
        r = lo + off
        for q in range(n):
            letter = LETTER_OF_BITS[(xm >> q & 1, zm >> q & 1)]
            mechs.append((r, q, letter))
            sigs.append(frozenset(tables.mechanism_events(recon, r, q, letter)))
            fbits.append(tracker.mechanism_bits((r, q, letter)))

    count = len(mechs)
    result = lambda w, idx: FaultDistanceResult(  # noqa: E731
        max_weight, w, tuple(mechs[i] for i in idx), count
    )

    if max_weight >= 1:
        for i, sig in enumerate(sigs):
            if not sig and fbits[i]:
                return result(1, (i,))

    by_sig: dict[frozenset, list[int]] = defaultdict(list)
    for i, sig in enumerate(sigs):
        by_sig[sig].append(i)
    if max_weight >= 2:
        for sig, group in by_sig.items():
            for ai, a in enumerate(group):
                for b in group[ai + 1:]:
                    if fbits[a] ^ fbits[b]:
                        return result(2, (a, b))

    by_event: dict[tuple[str, int], list[int]] = defaultdict(list)
    for i, sig in enumerate(sigs):
        for e in sig:
            by_event[e].append(i)
    if max_weight >= 3:
        # three mechanisms cancel iff two share one event and the third
        # matches the leftover pair
        for e, group in by_event.items():
            for ai, a in enumerate(group):
                for b in group[ai + 1:]:
                    rest = sigs[a] ^ sigs[b]
                    if len(rest) != 2:
                        continue
                    for c in by_sig.get(rest, ()):
                        if c in (a, b):
                            continue
                        if fbits[a] ^ fbits[b] ^ fbits[c]:
                            return result(3, (a, b, c))

    if max_weight >= 4:
        by_pair: dict[frozenset, list[tuple[int, int]]] = defaultdict(list)
        for i in range(count):
            for j in range(i + 1, count):
                by_pair[sigs[i] ^ sigs[j]].append((i, j))
        for sig, pair_list in by_pair.items():
            for pi, (a, b) in enumerate(pair_list):
                for c, d in pair_list[pi + 1:]:
                    if len({a, b, c, d}) != 4:
                        continue
                    if fbits[a] ^ fbits[b] ^ fbits[c] ^ fbits[d]:
                        return result(4, (a, b, c, d))

    return FaultDistanceResult(max_weight, None, None, count)


def intra_round_masks(lat: Lattice) -> dict[str, tuple[tuple[str, int], int]]:
    """Zigzag values as masks over one yellow+onsite round's outcomes.

    The attachment-face zigzags are products of yellow and on-site
    checks, all measured together in that round, so each value
    reconstructs from a single round's outcome positions.  Returns, per
    exported id, the attachment layer and the coefficient mask.
    """
    from .operators import build_checks, build_zigzag

    span = GeneratorSet(
        lat.n_qubits,
        list(build_checks(lat, "yellow")) + list(build_checks(lat, "onsite")),
    )
    out: dict[str, tuple[tuple[str, int], int]] = {}
    for o in lat.octagons:
        if o.color != "blue":
            continue
        mask = span.membership(build_zigzag(lat, o.face, "step2"))
        if mask is None:
            raise RuntimeError(f"zigzag at {o.face} escapes the round-one span")
        out[f"zz{o.index}"] = (o.layer, mask)
    return out


def membrane_operators(lat: Lattice) -> list[PauliOp]:
    """The step-4 generators beyond the local families, freshly derived."""
    trace = run_schedule(lat, canonical_schedule(lat), cycles=1)
    entry = trace.entry(trace.prefix_length - 1 + 4)
    local = GeneratorSet(
        lat.n_qubits,
        (op for _, ops in _step_local_families(lat, 4) for op in ops),
    )
    return extract_nonlocal_generators(entry.isg.group, local).ops()


class _DerivationReplay:
    """Record derivations of stabilizer values along a noiseless run.

    Mirrors the measurement update rule while tagging every generator
    with the set of recorded outcome bits whose product gives its sign.
    ``derive`` then expresses any current group element over the record,
    as {round index: outcome-position mask}.  Membranes never fit in a
    single round, so their comparisons need these multi-round masks.
    """

    def __init__(self, n: int, rounds: list[Round]):
        self.n = n
        self.rounds = rounds
        self.offsets = []
        tot = 0
        for rnd in rounds:
            self.offsets.append(tot)
            tot += len(rnd.checks)
        self._gens: list[tuple[int, int]] = []  # (operator vec, record bits)
        self._table: dict[int, tuple[int, int]] | None = None
        self._measured = 0
        # record identities: each determined check's outcome equals a
        # product of earlier outcomes, giving a mask that multiplies to
        # +1 on every noiseless record
        self.identities: list[int] = []

    def _mirror(self) -> dict[int, tuple[int, int]]:
        if self._table is None:
            table: dict[int, tuple[int, int]] = {}
            for v, h in self._gens:
                v, h = self._reduce(table, v, h)
                if v:
                    piv = (v & -v).bit_length() - 1
                    for q, (row, rh) in table.items():
                        if row >> piv & 1:
                            table[q] = (row ^ v, rh ^ h)
                    table[piv] = (v, h)
            self._table = table
        return self._table

    @staticmethod
    def _reduce(table, v: int, h: int = 0) -> tuple[int, int]:
        for piv, (row, rh) in table.items():
            if v >> piv & 1:
                v ^= row
                h ^= rh
        return v, h

    def advance(self, upto: int) -> None:
        """Measure rounds [measured, upto)."""
        for s in range(self._measured, upto):
            for pos, c in enumerate(self.rounds[s].checks):
                bit = 1 << (self.offsets[s] + pos)
                anti = [
                    i for i, (v, _) in enumerate(self._gens)
                    if sympl_vec(self.n, v, c.vec)
                ]
                if anti:
                    pv, ph = self._gens[anti[0]]
                    for i in anti[1:]:
                        v, h = self._gens[i]
                        self._gens[i] = (v ^ pv, h ^ ph)
                    del self._gens[anti[0]]
                    self._gens.append((c.vec, bit))
                    self._table = None
                else:
                    v, h = self._reduce(self._mirror(), c.vec)
                    if v:
                        self._gens.append((c.vec, bit))
                        self._table = None
                    else:
                        self.identities.append(h ^ bit)
        self._measured = upto

    def derive_flat(self, vec: int) -> int | None:
        """Record decomposition of ``vec``'s current value, or None."""
        v, h = self._reduce(self._mirror(), vec)
        return None if v else h

    def split(self, h: int) -> dict[int, int]:
        """Flat record mask as {round index: outcome-position mask}."""
        out: dict[int, int] = {}
        for s, lo in enumerate(self.offsets):
            width = len(self.rounds[s].checks)
            seg = (h >> lo) & ((1 << width) - 1)
            if seg:
                out[s] = seg
        return out

    def derive(self, vec: int) -> dict[int, int] | None:
        h = self.derive_flat(vec)
        return None if h is None else self.split(h)


def membrane_detector_masks(
    lat: Lattice, rounds: list[Round]
) -> dict[str, list[tuple[int, dict[int, int]]]]:
    """Comparison masks for the non-local membrane sector.

    Membranes join the group only at the cycle's second plain yellow
    round, so each is re-derived there and consecutive derivations are
    XORed into one comparison: per membrane id, a list of
    (inference round, {round: outcome-position mask}).  Raw comparisons
    are then reduced modulo the record identities of determined checks,
    which squeezes each into a canonical one-period window; what
    remains is still outside the span of the plaquette comparisons,
    which is what makes these worth exporting at all.
    """
    mems = membrane_operators(lat)
    replay = _DerivationReplay(lat.n_qubits, rounds)
    slots = [s for s, rnd in enumerate(rounds) if rnd.label == "yellow"]
    ident_table: dict[int, int] = {}
    consumed = 0

    def fold(m: int) -> int:
        for piv, row in ident_table.items():
            if m >> piv & 1:
                m ^= row
        return m

    prev: list[int] = []
    out: dict[str, list[tuple[int, dict[int, int]]]] = {
        f"mem{i}": [] for i in range(len(mems))
    }
    for s in slots:
        replay.advance(s + 1)
        # identities known by round s keep the folded masks inside
        # rounds <= s; later ones would leak future bits in
        for m in replay.identities[consumed:]:
            m = fold(m)
            if m:
                ident_table[(m & -m).bit_length() - 1] = m
        consumed = len(replay.identities)
        cur = []
        for i, mem in enumerate(mems):
            h = replay.derive_flat(mem.vec)
            if h is None:
                raise RuntimeError(
                    f"membrane {i} not derivable at yellow round {s}"
                )
            cur.append(h)
        if prev:
            for i, (ha, hb) in enumerate(zip(prev, cur)):
                out[f"mem{i}"].append((s, replay.split(fold(ha ^ hb))))
        prev = cur
    return out


def extension_detectors(
    trace: ErrorTrace,
    masks: dict[str, tuple[tuple[str, int], int]] | None = None,
    membranes: dict[str, list[tuple[int, dict[int, int]]]] | None = None,
) -> list[Detector]:
    """Fired zigzag and membrane detectors of a noisy trace.

    Zigzag values are compared between consecutive yellow+onsite
    rounds, membranes between consecutive plain yellow rounds; the
    first appearance of each is its anchor.  The baseline decoder
    ignores all of these; they are the advertised extension point.
    """
    if masks is None:
        masks = intra_round_masks(trace.lat)
    if membranes is None:
        membranes = membrane_detector_masks(trace.lat, trace.rounds)
    slots = [
        s for s, rnd in enumerate(trace.rounds) if rnd.label == "yellow+onsite"
    ]
    fired: list[Detector] = []
    for key, (layer, mask) in masks.items():
        prev = None
        for s in slots:
            bit = (trace.flips[s] & mask).bit_count() & 1
            if prev is not None and bit ^ prev:
                fired.append(Detector(layer, key, s, 1))
            prev = bit
    for key, comparisons in membranes.items():
        for s, delta in comparisons:
            bit = 0
            for r, m in delta.items():
                bit ^= (trace.flips[r] & m).bit_count() & 1
            if bit:
                fired.append(Detector(("-", -1), key, s, 1))
    return fired


def export_detector_lines(events: list[Detector]):
    """`layer plaquette_id inference_round value`, one line per event."""
    for e in events:
        yield f"{e.layer[0]}:{e.layer[1]} {e.plaquette} {e.inference_round} {e.value}"
