"""Exact minimum schedule length for the full-register-access task.

Every chain must visit the processing edge once and receive one single-qubit
gate.  Chains only differ by whether they still need their gate, so the
search runs over anonymous states:

* each memory segment is an ordered tuple of labels (sliding inside a
  segment is free, so positions within it do not matter);
* the interface is positional: entry slot, processing-edge counts, exit slot;
* the remaining time of the running gate.

The search is A* with an admissible bound (gates run one at a time, and the
interface junction is crossed once per step), so the first goal popped is
optimal.  A concrete witness schedule is rebuilt from the abstract path.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache

from ..arch_graph import INTERFACE, ArchGraph
from ..circuit.generators import full_register_access
from ..circuit.model import Circuit
from ..exceptions import BudgetExceededError, ValidationError
from ..placement import IonPlacement
from ..scheduler import Schedule, SchedulerConfig, TimeStep

U, D = 0, 1  # waiting for its gate / done
EMPTY = -1
# interface slots
SRC, EN, PZ, EX, OUT = -1, 0, 1, 2, 3


@dataclass
class OracleResult:
    T_min: int
    witness: Schedule
    states_explored: int
    circuit: Circuit = field(repr=False, default=None)
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        return {"T_min": self.T_min, "states_explored": self.states_explored}


def _iface_paths(start: int, movable: bool, locked: bool) -> list[tuple[int, ...]]:
    """Candidate slot paths for one interface chain (at most one junction hop)."""
    if not movable:
        return [(start,)]
    nxt = {SRC: (EN,), EN: (PZ,), PZ: (EX,), EX: (OUT, EN)}
    out = []

    def walk(path: tuple[int, ...], jumps: int) -> None:
        if not (start == SRC and len(path) == 1):
            out.append(path)
        last = path[-1]
        if last == OUT:
            return
        for s in nxt.get(last, ()):
            j = jumps + (1 if (last == EX or last == SRC) else 0)
            if j > 1 or s in path:
                continue
            walk(path + (s,), j)

    walk((start,), 0)
    if locked:
        out = [p for p in out if PZ not in p or p == (PZ,)]
    return out


def _jump_kind(path: tuple[int, ...]) -> str | None:
    for a, b in zip(path, path[1:]):
        if a == SRC:
            return "in"
        if a == EX and b == OUT:
            return "out"
        if a == EX and b == EN:
            return "outin"
    return None


@lru_cache(maxsize=None)
def _iface_outcomes(en: int, pu: int, pd: int, pa: int, ex: int, cap: int, locked: bool, jmode, in_label):
    """All interface results for one step.

    Returns tuples ``(en', pu', pd', pa', ex', out_label, assignment)`` where
    ``assignment`` lists ``(role, label, path)`` per moving chain and is used
    to rebuild concrete moves.
    """
    chains: list[tuple[str, int, int, bool]] = []  # role, label, start, movable
    if en != EMPTY:
        chains.append(("w", en, EN, True))
    chains += [("p", U, PZ, True)] * pu + [("p", D, PZ, True)] * pd + [("a", U, PZ, False)] * pa
    if ex != EMPTY:
        chains.append(("x", ex, EX, True))
    if jmode == "in":
        chains.append(("src", in_label, SRC, True))
    menus = [_iface_paths(s, mv, locked) for _, _, s, mv in chains]
    results = {}
    for combo in itertools.product(*menus):
        kinds = [k for k in map(_jump_kind, combo) if k is not None]
        if len(kinds) > 1 or (kinds[0] if kinds else None) != jmode:
            continue
        load = {EN: 0, PZ: 0, EX: 0}
        for p in combo:
            if p[-1] in load:
                load[p[-1]] += 1
        if load[EN] > 1 or load[EX] > 1 or load[PZ] > cap:
            continue
        if not _no_overtaking(combo):
            continue
        out_label = None
        new = {"en": EMPTY, "pu": 0, "pd": 0, "pa": 0, "ex": EMPTY}
        for (role, label, _, _), p in zip(chains, combo):
            end = p[-1]
            if end == OUT:
                out_label = label
            elif end == EN:
                new["en"] = label
            elif end == EX:
                new["ex"] = label
            elif role == "a":
                new["pa"] += 1
            else:
                new["pu" if label == U else "pd"] += 1
        key = (new["en"], new["pu"], new["pd"], new["pa"], new["ex"], out_label)
        if key not in results:
            results[key] = tuple((role, label, p) for (role, label, _, _), p in zip(chains, combo))
    return tuple(k + (v,) for k, v in results.items())


def _decision(x: int, option) -> tuple:
    i1, e1, i2, e2, _ = option
    src = "OUT" if i1 == "OUT" else (i1, e1)
    dst = "IN" if i2 == "IN" else (i2, e2)
    return (x, src, dst)


def _no_overtaking(paths) -> bool:
    for a, pa in enumerate(paths):
        for i in range(1, len(pa)):
            s = pa[i]
            if s not in (EN, PZ, EX):
                continue
            for b, pb in enumerate(paths):
                if b == a or pb[0] != s:
                    continue
                tail = pa[i:]
                if pb[: len(tail)] != tail:
                    return False
                if len(pb) <= len(tail) and pa[-1] != PZ:
                    return False
    return True


class _Model:
    """Static description of the architecture for the abstract search."""

    def __init__(self, graph: ArchGraph, duration: int):
        self.g = graph
        self.cap = graph.pz_capacity
        self.duration = duration
        self.segs = [s for s in graph.segments if s.orientation != INTERFACE]
        self.seg_len = [s.capacity for s in self.segs]
        self.seg_dist = [graph.entry_distance[s.edges[0]] for s in self.segs]
        self.j = graph.pz_junction
        ends: dict[int, list[tuple[int, int]]] = {}
        for i, s in enumerate(self.segs):
            ends.setdefault(s.a, []).append((i, 0))
            ends.setdefault(s.b, []).append((i, 1))
        self.junctions = sorted(ends)
        self.ends = ends
        self.seg_of_edge = {e: i for i, s in enumerate(self.segs) for e in s.edges}
        self.jidx = {x: k for k, x in enumerate(self.junctions)}
        self.seg_ends = [(s.a, s.b) for s in self.segs]
        # segment i is fully decided once the later of its two junctions is
        self.closes = [[] for _ in self.junctions]
        for i, (a, b) in enumerate(self.seg_ends):
            self.closes[max(self.jidx[a], self.jidx[b])].append(i)
        self.mirror = self._find_mirror()

    def _find_mirror(self):
        """Grid reflection fixing the interface junction, as ``[(segment, reversed)]``.

        States that are mirror images have the same distance to the goal, so
        the search keys on the smaller of the two.  ``None`` when the grid
        has no such symmetry.
        """
        g = self.g
        m, n = g.spec.m, g.spec.n
        by_ends = {frozenset(e): i for i, e in enumerate(self.seg_ends)}
        maps = [
            lambda r, c: (r, n - 1 - c),
            lambda r, c: (m - 1 - r, c),
            lambda r, c: (m - 1 - r, n - 1 - c),
            lambda r, c: (c, r),
            lambda r, c: (n - 1 - c, m - 1 - r),
            lambda r, c: (c, m - 1 - r),
            lambda r, c: (n - 1 - c, r),
        ]
        for f in maps:
            phi = {}
            for x, rc in g.node_coord.items():
                y = g.major_at.get(f(*rc))
                if y is None:
                    break
                phi[x] = y
            else:
                if phi[self.j] != self.j:
                    continue
                table = []
                for i, (a, b) in enumerate(self.seg_ends):
                    k = by_ends.get(frozenset((phi[a], phi[b])))
                    if k is None or self.seg_len[k] != self.seg_len[i]:
                        break
                    table.append((k, self.seg_ends[k][0] != phi[a]))
                else:
                    return table
        return None

    def canonical(self, state):
        if self.mirror is None:
            return state
        segs = state[0]
        image = [()] * len(segs)
        for i, (k, rev) in enumerate(self.mirror):
            image[k] = segs[i][::-1] if rev else segs[i]
        image = tuple(image)
        if image < segs:
            return (image,) + state[1:]
        return state

    # -- lower bound ---------------------------------------------------
    def bound(self, state) -> int:
        segs, en, pu, pd, pa, ex, timer = state
        entry_rel = []
        mem_chains = 0
        for i, t in enumerate(segs):
            mem_chains += len(t)
            d = self.seg_dist[i]
            entry_rel.extend(d for lab in t if lab == U)
        u_mem = len(entry_rel)
        if ex == U:
            entry_rel.append(1)
        entry_rel.sort()
        # earliest completion of each entry when the junction serves one per step
        cur = 0
        gate_rel = []
        for r in entry_rel:
            cur = max(r, cur + 1)
            gate_rel.append(cur)
        gate_rel += [1] * ((1 if en == U else 0) + pu)
        gate_rel.sort()
        busy = timer
        for r in gate_rel:
            busy = max(r, busy + 1) + self.duration - 1
        inside = (en != EMPTY) + pu + pd + pa + (ex != EMPTY)
        u_left = u_mem + (en == U) + pu + (ex == U)
        exits = 0
        if u_left:
            # when the last waiting chain is gated the others fit on the processing
            # edge and the exit edge (plus a done chain already parked on entry);
            # every other chain still has to cross the junction once more
            exits = max(0, inside + u_mem - 1 - self.cap - (en == D))
        jobs = sorted(entry_rel + [1] * exits)
        cur = 0
        for r in jobs:
            cur = max(r, cur + 1)
        if u_mem == 0 and ex != U:
            return max(busy, cur)
        return max(busy, cur, self._junction_sim(segs, en, pu, pd, pa, ex, timer))

    def _junction_sim(self, segs, en, pu, pd, pa, ex, timer) -> int:
        """Relaxed makespan with the interface junction as a unit machine.

        Chains from memory enter no earlier than their junction distance and
        only while the interface holds fewer than ``2 + cap`` chains; a
        finished chain may leave through the junction the step after its gate.
        Entries go first whenever possible, exits fill the other steps.
        Gates run one at a time in entry order.
        """
        rel = sorted(self.seg_dist[i] for i, t in enumerate(segs) for lab in t if lab == U)
        if ex == U:
            rel.insert(0, 1)  # it must re-enter through the junction
            ex = EMPTY
        inside = (en != EMPTY) + pu + pd + pa + (ex != EMPTY)
        slots = 2 + self.cap
        free_at = timer  # gate machine busy until the end of this step
        done_times = [0] * (pd + (en == D) + (ex == D))
        if pa:
            done_times.append(timer)
        for _ in range((en == U) + pu):
            free_at = max(1, free_at + 1) + self.duration - 1
            done_times.append(free_at)
        done_times.sort()
        t = 0
        k = 0
        last = free_at
        while k < len(rel):
            t += 1
            if rel[k] <= t and inside < slots:
                k += 1
                inside += 1
                last = max(t, last + 1) + self.duration - 1
                done_times.append(last)
                done_times.sort()
            elif done_times and done_times[0] < t:
                done_times.pop(0)
                inside -= 1
        return last

    # -- successors ----------------------------------------------------
    def successors(self, state, with_moves: bool = False):
        """List of ``(next_state, decision)``; ``decision`` is only filled when ``with_moves``.

        Every junction either stays idle or passes one chain from a segment
        end to another segment end; the interface junction also offers the
        entry and exit edges.  A segment's capacity is checked once both of
        its end junctions are decided.
        """
        segs, en, pu, pd, pa, ex, timer = state
        locked = timer > 0
        cap = self.cap
        seg_len = self.seg_len
        J = self.j
        modes = {}

        def iface(mode, in_label=None):
            key = (mode, in_label)
            if key not in modes:
                outs = _iface_outcomes(en, pu, pd, pa, ex, cap, locked, mode, in_label)
                if mode == "out":
                    grouped: dict = {}
                    for o in outs:
                        grouped.setdefault(o[5], []).append(o)
                    modes[key] = grouped
                else:
                    modes[key] = outs
            return modes[key]

        options = []
        for x in self.junctions:
            ends = self.ends[x]
            opts = [None]
            for i1, e1 in ends:
                t = segs[i1]
                if not t:
                    continue
                lab = t[0] if e1 == 0 else t[-1]
                for i2, e2 in ends:
                    if i2 != i1:
                        opts.append((i1, e1, i2, e2, lab))
                if x == J and iface("in", lab):
                    opts.append((i1, e1, "IN", None, lab))
            if x == J:
                for lab in iface("out"):
                    for i2, e2 in ends:
                        opts.append(("OUT", None, i2, e2, lab))
                if iface("outin"):
                    opts.append(("OUT", None, "IN", None, None))
            options.append(opts)

        nseg = len(segs)
        out_n = [0] * nseg
        in_n = [0] * nseg
        ex_a = [False] * nseg
        ex_b = [False] * nseg
        in_a: list = [None] * nseg
        in_b: list = [None] * nseg
        closes = self.closes
        chosen: list = []
        nj = len(options)
        duration = self.duration

        def leaf():
            mode = None
            in_label = out_label = None
            for o in chosen:
                if o is None:
                    continue
                if o[0] == "OUT":
                    mode = "outin" if o[2] == "IN" else "out"
                    out_label = o[4]
                elif o[2] == "IN":
                    mode = "in"
                    in_label = o[4]
            if mode == "out":
                outcomes = iface("out")[out_label]
            elif mode == "in":
                outcomes = iface("in", in_label)
            else:
                outcomes = iface(mode)
            new = list(segs)
            for i in touched:
                t = segs[i]
                t = t[(1 if ex_a[i] else 0) : len(t) - (1 if ex_b[i] else 0)]
                if in_a[i] is not None:
                    t = (in_a[i],) + t
                if in_b[i] is not None:
                    t = t + (in_b[i],)
                new[i] = t
            new = tuple(new)
            dec = None
            if with_moves:
                dec = tuple(_decision(self.junctions[k], o) for k, o in enumerate(chosen) if o is not None)
            for en2, pu2, pd2, pa2, ex2, _, assign in outcomes:
                t = timer
                if t == 0 and pu2 > 0:
                    pu2 -= 1
                    pa2 += 1
                    t = duration
                if t > 0:
                    t -= 1
                    if t == 0:
                        pa2 -= 1
                        pd2 += 1
                out.append(((new, en2, pu2, pd2, pa2, ex2, t), (dec, mode, assign) if with_moves else None))

        touched: set[int] = set()

        def ok(k) -> bool:
            for i in closes[k]:
                n = len(segs[i])
                if out_n[i] > n or n - out_n[i] + in_n[i] > seg_len[i]:
                    return False
            return True

        def rec(k):
            if k == nj:
                leaf()
                return
            for o in options[k]:
                if o is None:
                    chosen.append(None)
                    if ok(k):
                        rec(k + 1)
                    chosen.pop()
                    continue
                i1, e1, i2, e2, lab = o
                if i1 != "OUT":
                    out_n[i1] += 1
                    if e1 == 0:
                        ex_a[i1] = True
                    else:
                        ex_b[i1] = True
                    touched.add(i1)
                if i2 != "IN":
                    in_n[i2] += 1
                    if e2 == 0:
                        in_a[i2] = U if lab is None else lab
                    else:
                        in_b[i2] = U if lab is None else lab
                    touched.add(i2)
                chosen.append(o)
                if ok(k):
                    rec(k + 1)
                chosen.pop()
                if i2 != "IN":
                    in_n[i2] -= 1
                    if e2 == 0:
                        in_a[i2] = None
                    else:
                        in_b[i2] = None
                    if not (in_n[i2] or out_n[i2]):
                        touched.discard(i2)
                if i1 != "OUT":
                    out_n[i1] -= 1
                    if e1 == 0:
                        ex_a[i1] = False
                    else:
                        ex_b[i1] = False
                    if not (in_n[i1] or out_n[i1]):
                        touched.discard(i1)

        out: list = []
        rec(0)
        return out

    # -- state helpers -------------------------------------------------
    def initial_state(self, placement: IonPlacement):
        segs = [[] for _ in self.segs]
        en = ex = EMPTY
        pu = 0
        g = self.g
        for c in sorted(placement.positions):
            e = placement[c]
            if e == g.entry_edge:
                en = U
            elif e == g.exit_edge:
                ex = U
            elif e == g.processing_edge:
                pu += 1
            else:
                i = self.seg_of_edge[e]
                segs[i].append((self.segs[i].edges.index(e), U))
        tuples = tuple(tuple(lab for _, lab in sorted(s)) for s in segs)
        return (tuples, en, pu, 0, 0, ex, 0)

    @staticmethod
    def is_goal(state) -> bool:
        segs, en, pu, pd, pa, ex, timer = state
        return timer == 0 and pa == 0 and pu == 0 and en != U and ex != U and all(U not in t for t in segs)


@lru_cache(maxsize=None)
def _iface_codes(en, pu, pd, pa, ex, timer, cap, duration, mode, in_label):
    """Packed interface results (gate phase applied), grouped by the label sent out."""
    locked = timer > 0
    grouped: dict = {}
    r = cap + 1
    for en2, pu2, pd2, pa2, ex2, out_label, _ in _iface_outcomes(en, pu, pd, pa, ex, cap, locked, mode, in_label):
        t = timer
        if t == 0 and pu2 > 0:
            pu2 -= 1
            pa2 += 1
            t = duration
        if t > 0:
            t -= 1
            if t == 0:
                pa2 -= 1
                pd2 += 1
        code = (((((en2 + 1) * r + pu2) * r + pd2) * r + pa2) * 3 + ex2 + 1) * (duration + 1) + t
        grouped.setdefault(out_label, set()).add(code)
    return {k: tuple(sorted(v)) for k, v in grouped.items()}


class _Packed:
    """Integer encoding of abstract states and a fast successor generator.

    A segment holding labels ``l0 .. lk-1`` (from end a) is stored as the bit
    field ``1 << k | sum(l_i << i)``; fields are concatenated, and the
    interface is a mixed-radix number below ``self.base``.  Successors come
    back already canonical (mirror images folded), without decisions; the
    tuple generator of :class:`_Model` stays the reference and rebuilds the
    witness.
    """

    def __init__(self, model: _Model):
        self.m = model
        self.n = len(model.segs)
        self.off = []
        bit = 0
        for L in model.seg_len:
            self.off.append(bit)
            bit += L + 1
        self.mask = [(1 << (L + 1)) - 1 for L in model.seg_len]
        r = model.cap + 1
        self.r = r
        self.base = 3 * r * r * r * 3 * (model.duration + 1)
        self.labels = {}
        self.rev = {}
        self.trans = {}
        for L in set(model.seg_len):
            self._tables(L)
        if model.mirror is not None:
            self.moff = [0] * self.n
            self.mrev = [False] * self.n
            for i, (k, rev) in enumerate(model.mirror):
                self.moff[i] = self.off[k]
                self.mrev[i] = rev
        else:
            self.moff = self.mrev = None

    @staticmethod
    def _code(t) -> int:
        c = 1 << len(t)
        for i, lab in enumerate(t):
            c |= lab << i
        return c

    def _tables(self, L: int) -> None:
        size = 1 << (L + 1)
        labels: list = [None] * size
        for k in range(L + 1):
            for bits in range(1 << k):
                labels[(1 << k) | bits] = tuple((bits >> i) & 1 for i in range(k))
        rev = [0] * size
        trans = [-1] * (size * 36)
        for code, t in enumerate(labels):
            if t is None:
                continue
            rev[code] = self._code(t[::-1])
            n = len(t)
            for ea in (0, 1):
                for eb in (0, 1):
                    if ea + eb > n:
                        continue
                    mid = t[ea : n - eb]
                    for ia in (0, 1, 2):
                        for ib in (0, 1, 2):
                            new = mid
                            if ia != 2:
                                new = (ia,) + new
                            if ib != 2:
                                new = new + (ib,)
                            if len(new) <= L:
                                trans[(((code * 2 + ea) * 2 + eb) * 3 + ia) * 3 + ib] = self._code(new)
        self.labels[L] = labels
        self.rev[L] = rev
        self.trans[L] = trans

    # -- conversions ---------------------------------------------------
    def encode(self, state) -> int:
        segs, en, pu, pd, pa, ex, timer = state
        mem = 0
        for i, t in enumerate(segs):
            mem |= self._code(t) << self.off[i]
        r = self.r
        ic = (((((en + 1) * r + pu) * r + pd) * r + pa) * 3 + ex + 1) * (self.m.duration + 1) + timer
        return mem * self.base + ic

    def decode(self, x: int):
        mem, ic = divmod(x, self.base)
        ic, timer = divmod(ic, self.m.duration + 1)
        ic, ex = divmod(ic, 3)
        ic, pa = divmod(ic, self.r)
        ic, pd = divmod(ic, self.r)
        en, pu = divmod(ic, self.r)
        segs = tuple(
            self.labels[L][(mem >> self.off[i]) & self.mask[i]] for i, L in enumerate(self.m.seg_len)
        )
        return (segs, en - 1, pu, pd, pa, ex - 1, timer)

    def _mirror_mem(self, codes) -> int:
        out = 0
        for i, c in enumerate(codes):
            L = self.m.seg_len[i]
            out |= (self.rev[L][c] if self.mrev[i] else c) << self.moff[i]
        return out

    def canonical(self, x: int) -> int:
        if self.moff is None:
            return x
        mem, ic = divmod(x, self.base)
        codes = [(mem >> self.off[i]) & self.mask[i] for i in range(self.n)]
        return min(mem, self._mirror_mem(codes)) * self.base + ic

    # -- successors ----------------------------------------------------
    def successors(self, x: int) -> set[int]:
        m = self.m
        base = self.base
        mem, ic = divmod(x, base)
        _, en, pu, pd, pa, ex, timer = self.decode(ic)
        cap, duration = m.cap, m.duration
        seg_len = m.seg_len
        off, mask = self.off, self.mask
        codes = [(mem >> off[i]) & mask[i] for i in range(self.n)]
        labs = [self.labels[seg_len[i]][c] for i, c in enumerate(codes)]
        mirror = self.moff is not None
        mir = self._mirror_mem(codes) if mirror else 0
        moff, mrev = self.moff, self.mrev

        def iface(mode, label=None):
            return _iface_codes(en, pu, pd, pa, ex, timer, cap, duration, mode, label)

        J = m.j
        options = []
        for x_ in m.junctions:
            ends = m.ends[x_]
            opts = [None]
            for i1, e1 in ends:
                t = labs[i1]
                if not t:
                    continue
                lab = t[0] if e1 == 0 else t[-1]
                for i2, e2 in ends:
                    if i2 != i1:
                        opts.append((i1, e1, i2, e2, lab, None))
                if x_ == J and iface("in", lab):
                    opts.append((i1, e1, -1, 0, lab, ("in", lab)))
            if x_ == J:
                for lab in iface("out"):
                    for i2, e2 in ends:
                        opts.append((-1, 0, i2, e2, lab, ("out", lab)))
                if iface("outin"):
                    opts.append((-1, 0, -1, 0, None, ("outin", None)))
            options.append(opts)

        n = self.n
        ea = [0] * n
        eb = [0] * n
        ia = [2] * n
        ib = [2] * n
        closes = m.closes
        trans = [self.trans[L] for L in seg_len]
        revs = [self.rev[L] for L in seg_len]
        nj = len(options)
        out: set[int] = set()

        def rec(k, delta, mdelta, mode):
            if k == nj:
                if mode is None:
                    codes_out = iface(None).get(None, ())
                else:
                    codes_out = iface(mode[0], mode[1] if mode[0] == "in" else None).get(
                        mode[1] if mode[0] == "out" else None, ()
                    )
                m2 = mem + delta
                if mirror:
                    mm = mir + mdelta
                    if mm < m2:
                        m2 = mm
                b = m2 * base
                for c in codes_out:
                    out.add(b + c)
                return
            for o in options[k]:
                if o is not None:
                    i1, e1, i2, e2, lab, jm = o
                    if i1 >= 0:
                        if e1 == 0:
                            ea[i1] = 1
                        else:
                            eb[i1] = 1
                    if i2 >= 0:
                        if e2 == 0:
                            ia[i2] = lab
                        else:
                            ib[i2] = lab
                    if jm is not None:
                        mode = jm
                d, md = delta, mdelta
                good = True
                for i in closes[k]:
                    if ea[i] or eb[i] or ia[i] != 2 or ib[i] != 2:
                        c = codes[i]
                        new = trans[i][(((c * 2 + ea[i]) * 2 + eb[i]) * 3 + ia[i]) * 3 + ib[i]]
                        if new < 0:
                            good = False
                            break
                        d += (new - c) << off[i]
                        if mirror:
                            if mrev[i]:
                                md += (revs[i][new] - revs[i][c]) << moff[i]
                            else:
                                md += (new - c) << moff[i]
                if good:
                    rec(k + 1, d, md, mode)
                if o is not None:
                    if i1 >= 0:
                        if e1 == 0:
                            ea[i1] = 0
                        else:
                            eb[i1] = 0
                    if i2 >= 0:
                        if e2 == 0:
                            ia[i2] = 2
                        else:
                            ib[i2] = 2
                    if jm is not None:
                        mode = None

        rec(0, 0, 0, None)
        return out


def optimal_schedule_length(
    graph: ArchGraph,
    initial: IonPlacement,
    task: str = "fra",
    cfg: SchedulerConfig | None = None,
    budget: int = 10**7,
    time_limit: float | None = None,
) -> OracleResult:
    """Shortest schedule (in time steps) for full register access from ``initial``.

    Raises
    ------
    BudgetExceededError
        More than ``budget`` distinct states were generated, or
        ``time_limit`` seconds elapsed; carries frontier statistics.
    """
    if task not in ("fra", "full_register_access"):
        raise ValidationError("the oracle only solves the full-register-access task", field="task")
    cfg = (cfg or SchedulerConfig()).validate()
    initial.validate(graph)
    chains = sorted(initial.positions)
    if chains != list(range(len(chains))):
        raise ValidationError("chains must be numbered 0..n-1", field="placement")
    circuit = full_register_access(len(chains))
    t0 = time.perf_counter()
    model = _Model(graph, cfg.duration_1q)
    packed = _Packed(model)
    raw_start = model.initial_state(initial)
    start = packed.canonical(packed.encode(raw_start))
    parent = {start: None}
    g_cost = {start: 0}
    tie = itertools.count()
    heap = [(model.bound(raw_start), 0, next(tie), start)]
    goal = None
    expanded = 0
    while heap:
        f, neg_g, _, state = heapq.heappop(heap)
        g = -neg_g
        if g_cost.get(state, 1 << 30) < g:
            continue
        if model.is_goal(packed.decode(state)):
            goal = state
            break
        expanded += 1
        if len(g_cost) > budget or (time_limit is not None and time.perf_counter() - t0 > time_limit):
            raise BudgetExceededError(
                f"oracle budget exhausted after {len(g_cost)} states",
                stats={"states": len(g_cost), "expanded": expanded, "frontier": len(heap), "best_f": f},
            )
        ng = g + 1
        for nxt in packed.successors(state):
            if ng < g_cost.get(nxt, 1 << 30):
                g_cost[nxt] = ng
                parent[nxt] = state
                heapq.heappush(heap, (ng + model.bound(packed.decode(nxt)), -ng, next(tie), nxt))
    if goal is None:
        raise ValidationError("the task cannot be completed on this architecture", field="placement")
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    witness = _rebuild(model, packed, initial, circuit, raw_start, path)
    return OracleResult(
        T_min=len(path) - 1,
        witness=witness,
        states_explored=len(g_cost),
        circuit=circuit,
        elapsed=time.perf_counter() - t0,
    )


# -- witness reconstruction ---------------------------------------------
def _rebuild(model: _Model, packed: _Packed, initial: IonPlacement, circuit: Circuit, raw_start, path) -> Schedule:
    g = model.g
    pos = dict(initial.positions)
    done: set[int] = set()
    active: tuple[int, int] | None = None
    gate_of = {gate.qubits[0]: gate.id for gate in circuit.gates}
    schedule = Schedule(gate_count=len(circuit.gates))
    cur = raw_start
    for t, nxt in enumerate(path[1:]):
        # the path holds canonical states; follow the concrete one they stand for
        for cand, decision in model.successors(cur, with_moves=True):
            if packed.canonical(packed.encode(cand)) == nxt:
                cur = cand
                break
        else:  # pragma: no cover - the path came from the same successor function
            raise RuntimeError("witness reconstruction lost the abstract path")
        step = TimeStep(index=t)
        hops = _concrete_moves(model, pos, done, active, decision)
        step.moves = hops
        for c, _, to in hops:
            pos[c] = to
        if active is None:
            waiting = sorted(c for c, e in pos.items() if e == g.processing_edge and c not in done)
            if waiting:
                active = (waiting[0], model.duration)
                step.gates_started.append(gate_of[waiting[0]])
        if active is not None:
            c, left = active
            left -= 1
            if left == 0:
                done.add(c)
                step.gates_finished.append(gate_of[c])
                active = None
            else:
                active = (c, left)
        schedule.steps.append(step)
    crossings: dict[int, int] = {c: 0 for c in pos}
    for s in schedule.steps:
        for c, a, b in s.moves:
            if g.is_major(g.shared_node(a, b)):
                crossings[c] += 1
    schedule.per_chain_crossings = crossings
    return schedule


def _concrete_moves(model: _Model, pos: dict[int, int], done: set[int], active, decision) -> list[tuple[int, int, int]]:
    g = model.g
    decisions, jmode, assign = decision
    label = {c: (D if c in done else U) for c in pos}
    # chains per segment, ordered from end a to end b
    members: list[list[int]] = [[] for _ in model.segs]
    for c, e in pos.items():
        i = model.seg_of_edge.get(e)
        if i is not None:
            members[i].append(c)
    for i, s in enumerate(model.segs):
        members[i].sort(key=lambda c: s.edges.index(pos[c]))
    paths: dict[int, list[int]] = {}
    exits = [[None, None] for _ in model.segs]
    entries = [[None, None] for _ in model.segs]
    iface_in = None  # chain entering the entry edge from memory
    out_dest = None  # (segment, end) receiving the chain leaving the interface
    for x, src, dst in decisions:
        if src == "OUT":
            if dst != "IN":
                out_dest = dst
            continue
        i1, e1 = src
        c = members[i1][0] if e1 == 0 else members[i1][-1]
        exits[i1][e1] = c
        if dst == "IN":
            iface_in = c
        else:
            entries[dst[0]][dst[1]] = c
    # interface chains by role
    w = next((c for c, e in pos.items() if e == g.entry_edge), None)
    xch = next((c for c, e in pos.items() if e == g.exit_edge), None)
    in_p = sorted(c for c, e in pos.items() if e == g.processing_edge)
    act = active[0] if active else None
    pool = {U: [c for c in in_p if label[c] == U and c != act], D: [c for c in in_p if label[c] == D]}
    slot_edge = {EN: g.entry_edge, PZ: g.processing_edge, EX: g.exit_edge}
    out_chain = None
    iface_paths: dict[int, list[int]] = {}
    for role, lab, spath in assign:
        if role == "w":
            c = w
        elif role == "x":
            c = xch
        elif role == "src":
            c = iface_in
        elif role == "a":
            c = act
        else:
            c = pool[lab].pop(0)
        edges = []
        for s in spath:
            if s == OUT:
                out_chain = c
                edges.append(None)  # filled in once the memory target is known
            elif s == SRC:
                continue
            else:
                edges.append(slot_edge[s])
        iface_paths[c] = edges
    if out_chain is not None and out_dest is not None:
        entries[out_dest[0]][out_dest[1]] = out_chain
    # memory segments: exits slide to their end, the rest compress, entrants take the ends
    final: dict[int, int] = {}
    for i, s in enumerate(model.segs):
        L = len(s.edges)
        stay = [c for c in members[i] if c not in (exits[i][0], exits[i][1])]
        lo = 1 if entries[i][0] is not None else 0
        hi = L - 1 - (1 if entries[i][1] is not None else 0)
        m = len(stay)
        for k, c in enumerate(stay):
            p = s.edges.index(pos[c])
            q = min(max(p, lo + k), hi - (m - 1 - k))
            final[c] = s.edges[q]
            if q != p:
                step_dir = 1 if q > p else -1
                paths[c] = [s.edges[r] for r in range(p, q + step_dir, step_dir)]
        for end in (0, 1):
            c = exits[i][end]
            if c is not None:
                p = s.edges.index(pos[c])
                tgt = 0 if end == 0 else L - 1
                d = -1 if end == 0 else 1
                paths[c] = [s.edges[r] for r in range(p, tgt + d, d)]
            c = entries[i][end]
            if c is not None:
                final[c] = s.edges[0] if end == 0 else s.edges[-1]
    # attach crossings: exiting memory chains continue into their destination
    for i, s in enumerate(model.segs):
        for end in (0, 1):
            c = exits[i][end]
            if c is None:
                continue
            if c == iface_in:
                paths[c] = paths[c] + [e for e in iface_paths[c]]
            else:
                paths[c] = paths[c] + [final[c]]
    for c, edges in iface_paths.items():
        if c == iface_in:
            continue
        full = [pos[c]] + edges[1:] if edges and edges[0] == pos[c] else [pos[c]] + edges
        if None in full:
            full[full.index(None)] = final[c]
        if len(full) > 1:
            paths[c] = full
    hops = []
    for c in sorted(paths):
        p = paths[c]
        hops.extend((c, a, b) for a, b in zip(p, p[1:]))
    return hops
