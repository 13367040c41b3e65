"""Opaque predicates over ring structures, and always-false groups.

Two threads walking circular linked structures give predicates whose
value an observer cannot pin down statically (token values vary tick
to tick), while pointer/ring discipline keeps chosen comparisons false
in every reachable state. Groups bundle such predicates so only the
whole group's value matters:

* unconditional grouping anchors the group with at least one member
  that is structurally false (never true in any reachable state);
* conditional grouping designates references P1, P2 and forces
  P2 := false whenever P1 holds, so an AND fold can never fire.

Real threads are replaced by a deterministic virtual-tick scheduler: a
mover fires when its period divides the tick (plus a seeded phase), so
identical seeds reproduce identical logs byte for byte.
"""

import copy
import random
from dataclasses import dataclass, field


class MalformedGroup(Exception):
    """Group construction that cannot guarantee an always-false value."""


class Node:
    """Ring node per the source listing: fresh nodes self-link."""

    __slots__ = ("token", "head", "tail", "nid")
    _count = 0

    def __init__(self):
        self.token = False
        self.head = self
        self.tail = self
        Node._count += 1
        self.nid = Node._count

    def add_node(self) -> "Node":
        p = Node()
        p.head = self.tail
        self.head = p
        return p

    def move_next(self) -> "Node":
        return self.tail.head

    def move_back(self) -> "Node":
        return self.head.tail

    def __repr__(self):
        return "<node %d token=%s>" % (self.nid, self.token)

    def __deepcopy__(self, memo):
        # keep slots while preserving shared structure across the ring
        clone = object.__new__(Node)
        memo[id(self)] = clone
        clone.token = self.token
        clone.nid = self.nid
        clone.head = copy.deepcopy(self.head, memo)
        clone.tail = copy.deepcopy(self.tail, memo)
        return clone


class NodeRing:
    """A root node plus the arena of every node added through the ring."""

    def __init__(self, name: str):
        self.name = name
        self.root = Node()
        self.arena = [self.root]

    def add_node(self, at: Node = None) -> Node:
        node = (at or self.root).add_node()
        self.arena.append(node)
        return node

    def __contains__(self, node: Node) -> bool:
        return any(n is node for n in self.arena)


@dataclass
class Mover:
    name: str      # thread symbol, e.g. "T"
    pointer: str   # pointer symbol it updates
    direction: str  # "next" or "back"
    period: int    # fires when (tick + phase) % period == 0

    def __post_init__(self):
        if self.direction not in ("next", "back"):
            raise ValueError("direction must be 'next' or 'back'")
        if self.period < 1:
            raise ValueError("period must be >= 1")


class PredicateWorld:
    """Rings, named pointers, and the movers that walk them."""

    def __init__(self, report_style: str = "pq"):
        self.rings = {}         # ring name -> NodeRing
        self.pointers = {}      # symbol -> Node
        self.pointer_ring = {}  # symbol -> ring name
        self.movers = []
        self.report_style = report_style

    def add_ring(self, name: str, root_token: bool = True) -> NodeRing:
        ring = NodeRing(name)
        ring.root.token = root_token
        self.rings[name] = ring
        return ring

    def bind(self, symbol: str, ring_name: str, node: Node):
        if node not in self.rings[ring_name]:
            raise ValueError("node is not in ring %s" % ring_name)
        self.pointers[symbol] = node
        self.pointer_ring[symbol] = ring_name

    def ring_of(self, symbol: str) -> str:
        return self.pointer_ring[symbol]

    def clone(self) -> "PredicateWorld":
        return copy.deepcopy(self)


def two_ring_world(p_period: int = 3, q_period: int = 1,
                   added_nodes: int = 1, report_style: str = "pq") -> PredicateWorld:
    """Rings G and H (roots g, h with token=true), pointers p and q.

    Mover T advances p ring-forward every p_period ticks; mover S walks
    q ring-backward every q_period ticks.
    """
    world = PredicateWorld(report_style)
    ring_g = world.add_ring("G")
    ring_h = world.add_ring("H")
    world.bind("g", "G", ring_g.root)
    world.bind("h", "H", ring_h.root)
    p = q = None
    for _ in range(max(added_nodes, 1)):
        p = ring_g.add_node()
        q = ring_h.add_node()
    world.bind("p", "G", p)
    world.bind("q", "H", q)
    world.movers = [Mover("T", "p", "next", p_period),
                    Mover("S", "q", "back", q_period)]
    return world


def single_ring_world(period: int = 1, added_nodes: int = 1) -> PredicateWorld:
    """One ring G with pointer p and a single forward mover."""
    world = PredicateWorld("p")
    ring = world.add_ring("G")
    world.bind("g", "G", ring.root)
    p = None
    for _ in range(max(added_nodes, 1)):
        p = ring.add_node()
    world.bind("p", "G", p)
    world.movers = [Mover("T", "p", "next", period)]
    return world


WORLD_SHAPES = {
    "3:1": lambda: two_ring_world(3, 1, report_style="pq"),
    "2:1": lambda: two_ring_world(2, 1, report_style="gh"),
    "single": lambda: single_ring_world(1),
}


def make_world(shape: str) -> PredicateWorld:
    try:
        return WORLD_SHAPES[shape]()
    except KeyError:
        raise ValueError("unknown world shape %r (have %s)"
                         % (shape, sorted(WORLD_SHAPES))) from None


@dataclass
class WorldState:
    """One trajectory point: symbol resolution plus a per-tick RNG."""

    tick: int
    nodes: dict
    pointer_ring: dict
    arenas: dict
    rng: random.Random

    def node(self, symbol: str) -> Node:
        return self.nodes[symbol]


def _state(world: PredicateWorld, tick: int, seed: int) -> WorldState:
    return WorldState(
        tick=tick,
        nodes=dict(world.pointers),
        pointer_ring=dict(world.pointer_ring),
        arenas={name: tuple(ring.arena) for name, ring in world.rings.items()},
        rng=random.Random(seed * 1_000_003 + tick),
    )


def step_world(world: PredicateWorld, seed: int, ticks: int) -> list:
    """Trajectory of WorldStates: the initial state plus one per tick.

    Deterministic in (world, seed, ticks); the seed only shifts each
    mover's phase. Movement mutates a cloned world, never the input.
    """
    if ticks < 0:
        raise ValueError("ticks must be >= 0")
    w = world.clone()
    rng = random.Random(seed)
    phases = [rng.randrange(m.period) for m in w.movers]
    states = [_state(w, 0, seed)]
    for tick in range(1, ticks + 1):
        for mover, phase in zip(w.movers, phases):
            if (tick + phase) % mover.period != 0:
                continue
            node = w.pointers[mover.pointer]
            moved = node.move_next() if mover.direction == "next" else node.move_back()
            w.pointers[mover.pointer] = moved
        states.append(_state(w, tick, seed))
    return states


def ring_closure_ok(state: WorldState) -> bool:
    """Every pointer still references a node of its own ring."""
    return all(any(state.nodes[sym] is node for node in state.arenas[ring])
               for sym, ring in state.pointer_ring.items())


# --- predicate atoms ---------------------------------------------------------

def pell_predicate(x: int, y: int) -> bool:
    """(7x^2 - 1) == y^2; false for every integer pair, since squares
    mod 7 land in {0, 1, 2, 4} and the left side is always 6 mod 7."""
    return (7 * x * x - 1) == y * y


class ConstTrue:
    label = "true"

    def eval(self, state) -> bool:
        return True

    def structurally_false(self, world) -> bool:
        return False

    def structurally_true(self, world) -> bool:
        return True

    def __repr__(self):
        return "ConstTrue()"


class ConstFalse:
    label = "false"

    def eval(self, state) -> bool:
        return False

    def structurally_false(self, world) -> bool:
        return True

    def structurally_true(self, world) -> bool:
        return False

    def __repr__(self):
        return "ConstFalse()"


@dataclass
class SameNode:
    a: str
    b: str

    @property
    def label(self):
        return "%s == %s" % (self.a, self.b)

    def eval(self, state) -> bool:
        return state.node(self.a) is state.node(self.b)

    def structurally_false(self, world) -> bool:
        # pointers pinned to different rings can never meet (ring closure)
        return world.ring_of(self.a) != world.ring_of(self.b)

    def structurally_true(self, world) -> bool:
        return self.a == self.b


@dataclass
class TokenOf:
    pointer: str

    @property
    def label(self):
        return "%s.token" % self.pointer

    def eval(self, state) -> bool:
        return state.node(self.pointer).token

    def structurally_false(self, world) -> bool:
        return False

    def structurally_true(self, world) -> bool:
        return False


class PellFalse:
    """Evaluates the square identity on pairs drawn from the state RNG."""

    label = "(7x^2-1) == y^2"

    def eval(self, state) -> bool:
        x = state.rng.getrandbits(63)
        y = state.rng.getrandbits(63)
        return pell_predicate(x, y)

    def structurally_false(self, world) -> bool:
        return True

    def structurally_true(self, world) -> bool:
        return False

    def __repr__(self):
        return "PellFalse()"


@dataclass
class Not:
    child: object

    @property
    def label(self):
        return "!(%s)" % self.child.label

    def eval(self, state) -> bool:
        return not self.child.eval(state)

    def structurally_false(self, world) -> bool:
        return self.child.structurally_true(world)

    def structurally_true(self, world) -> bool:
        return self.child.structurally_false(world)


class And:
    def __init__(self, *members):
        self.members = members

    @property
    def label(self):
        return "(" + " && ".join(m.label for m in self.members) + ")"

    def eval(self, state) -> bool:
        return all(m.eval(state) for m in self.members)

    def structurally_false(self, world) -> bool:
        return any(m.structurally_false(world) for m in self.members)

    def structurally_true(self, world) -> bool:
        return all(m.structurally_true(world) for m in self.members)


class Or:
    def __init__(self, *members):
        self.members = members

    @property
    def label(self):
        return "(" + " || ".join(m.label for m in self.members) + ")"

    def eval(self, state) -> bool:
        return any(m.eval(state) for m in self.members)

    def structurally_false(self, world) -> bool:
        return all(m.structurally_false(world) for m in self.members)

    def structurally_true(self, world) -> bool:
        return any(m.structurally_true(world) for m in self.members)


def eval_atom(atom, state) -> bool:
    return atom.eval(state)


# --- predicate groups --------------------------------------------------------

@dataclass
class PredicateGroup:
    members: list
    operator: str = "AND"
    algorithm: str = "I"
    label: str = "group"


def unconditional_group(members, world, operator: str = "AND",
                        label: str = "unconditional") -> PredicateGroup:
    """Always-false group anchored by a structurally-false member."""
    if operator != "AND":
        raise MalformedGroup("unconditional grouping guarantees false only "
                             "under AND, not %r" % operator)
    if not members:
        raise MalformedGroup("group has no members")
    if not any(m.structurally_false(world) for m in members):
        raise MalformedGroup("no member is structurally false; the group "
                             "could evaluate true")
    return PredicateGroup(list(members), operator, "I", label)


def conditional_group(members, world=None, operator: str = "AND",
                      label: str = "conditional") -> PredicateGroup:
    """Always-false group via enforcement: if P1 then P2 := false.

    members[0] is P1 and members[1] is P2; both may be fully dynamic.
    """
    if operator != "AND":
        raise MalformedGroup("conditional grouping guarantees false only "
                             "under AND, not %r" % operator)
    if len(members) < 2:
        raise MalformedGroup("conditional grouping needs reference "
                             "predicates P1 and P2")
    return PredicateGroup(list(members), operator, "II", label)


def eval_group(group: PredicateGroup, state):
    """(group value, member vector) with conditional enforcement applied."""
    values = [m.eval(state) for m in group.members]
    if group.algorithm == "II" and values[0]:
        values[1] = False
    if group.operator == "AND":
        folded = all(values)
    elif group.operator == "OR":
        folded = any(values)
    else:
        raise ValueError("unknown operator %r" % group.operator)
    return folded, values


def groups_for(world: PredicateWorld) -> list:
    """Canonical demonstration groups for a world, one per algorithm."""
    if "q" in world.pointers:
        unconditional = unconditional_group(
            [SameNode("p", "q"), TokenOf("p"),
             Or(SameNode("h", "p"), TokenOf("q"))], world)
        conditional = conditional_group(
            [TokenOf("p"), TokenOf("q"), Or(TokenOf("p"), TokenOf("q"))], world)
    else:
        unconditional = unconditional_group(
            [PellFalse(), TokenOf("p"), Or(ConstFalse(), TokenOf("p"))], world)
        conditional = conditional_group(
            [TokenOf("p"), Not(TokenOf("p")), ConstTrue()], world)
    return [unconditional, conditional]


# --- observation logs --------------------------------------------------------

def _fmt(value: bool) -> str:
    return "true" if value else "false"


@dataclass
class Observation:
    run: int
    tick: int
    tokens: dict
    same_node: bool
    group_values: dict  # label -> (value, member vector)


@dataclass
class ObservationLog:
    lines: list = field(default_factory=list)
    observations: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _observation_line(world: PredicateWorld, state: WorldState) -> str:
    p_tok = _fmt(state.node("p").token)
    if "q" not in world.pointers:
        return "P token = %s" % p_tok
    q_tok = _fmt(state.node("q").token)
    if world.report_style == "gh":
        same = _fmt(state.node("g") is state.node("h"))
        return "P Token = %s Q Token = %s (G == H) = %s" % (p_tok, q_tok, same)
    same = _fmt(state.node("p") is state.node("q"))
    return "P token = %s, Q token = %s, P == Q %s" % (p_tok, q_tok, same)


def run_observation(world: PredicateWorld, groups, seed: int,
                    runs: int = 1, ticks_per_run: int = 6) -> ObservationLog:
    """Advance the world `runs` times and sample every guard point.

    Each run restarts the world with a derived seed; every tick after
    movement is a guard point, logged as one observation line. Group
    values go to per-run trailer lines and the stats block.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    log = ObservationLog()
    member_true = {g.label: [0] * len(g.members) for g in groups}
    group_true = {g.label: 0 for g in groups}
    token_true = {sym: 0 for sym in world.pointers}
    total = 0
    for run in range(1, runs + 1):
        subseed = seed * 100_003 + run
        states = step_world(world, subseed, ticks_per_run)
        log.lines.append("Run %d" % run)
        run_group_false = {g.label: 0 for g in groups}
        run_group_any_true = {g.label: False for g in groups}
        for state in states[1:]:
            total += 1
            log.lines.append(_observation_line(world, state))
            tokens = {sym: state.node(sym).token for sym in world.pointers}
            for sym, value in tokens.items():
                token_true[sym] += value
            same = (state.node("p") is state.node("q")
                    if "q" in world.pointers else False)
            values = {}
            for g in groups:
                folded, vector = eval_group(g, state)
                values[g.label] = (folded, vector)
                group_true[g.label] += folded
                run_group_false[g.label] += (not folded)
                run_group_any_true[g.label] |= folded
                for i, v in enumerate(vector):
                    member_true[g.label][i] += v
            log.observations.append(Observation(run, state.tick, tokens,
                                                same, values))
        for g in groups:
            log.lines.append("group %s = %s (%d/%d guard points)"
                             % (g.label, _fmt(run_group_any_true[g.label]),
                                run_group_false[g.label], ticks_per_run))
    log.stats = {
        "runs": runs,
        "ticks_per_run": ticks_per_run,
        "observations": total,
        "token_true_rate": {sym: count / total if total else 0.0
                            for sym, count in token_true.items()},
        "group_true_count": dict(group_true),
        "member_true_rate": {
            label: [count / total if total else 0.0 for count in counts]
            for label, counts in member_true.items()
        },
    }
    return log
