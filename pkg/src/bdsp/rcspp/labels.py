"""Labels over the pricing graph: resource extension and dominance.

The pricing problem is split into three disjoint variants by the status of
the 30-minute rest part at the sink (none, uncentered, centered), which fixes
the unpaid-rest cap per variant and makes accumulated unpaid rest exact.
"""
from __future__ import annotations

from enum import Enum

from ..model import RulesConfig
from .graph import SINK, Arc


class Variant(Enum):
    NO_B30 = "no_b30"
    UNCENTERED = "uncentered"
    CENTERED = "centered"

    def cap(self, rules: RulesConfig) -> int:
        if self is Variant.NO_B30:
            return 0
        if self is Variant.UNCENTERED:
            return rules.unpaid_cap_uncentered
        return rules.unpaid_cap_centered

    def admits(self, arc: Arc, rules: RulesConfig) -> bool:
        return not (self is Variant.NO_B30 and arc.rest >= rules.rest_long_part)

    def accepts(self, b30: bool, bc30: bool) -> bool:
        if self is Variant.NO_B30:
            return not b30
        if self is Variant.UNCENTERED:
            return b30 and not bc30
        return b30 and bc30

    @staticmethod
    def of(b30: bool, bc30: bool) -> "Variant":
        if not b30:
            return Variant.NO_B30
        return Variant.CENTERED if bc30 else Variant.UNCENTERED


VARIANTS = (Variant.NO_B30, Variant.UNCENTERED, Variant.CENTERED)


class Label:
    """Partial path state. ``cost`` is the dual-adjusted cost before the
    minimum-working-time term; ``final`` adds that term at the sink."""

    __slots__ = ("node", "pred", "leg", "d", "s", "dc", "b15", "b20", "w", "r", "u", "b30", "bc30", "cost", "final")

    def __init__(self, node, pred, leg, d, s, dc, b15, b20, w, r, u, b30, bc30, cost, final=None):
        self.node = node
        self.pred = pred
        self.leg = leg
        self.d = d
        self.s = s
        self.dc = dc
        self.b15 = b15
        self.b20 = b20
        self.w = w
        self.r = r
        self.u = u
        self.b30 = b30
        self.bc30 = bc30
        self.cost = cost
        self.final = final

    def legs(self) -> tuple[int, ...]:
        out = []
        lab = self
        while lab is not None:
            if lab.leg >= 0:
                out.append(lab.leg)
            lab = lab.pred
        return tuple(reversed(out))

    def resources(self) -> tuple:
        return (self.d, self.s, self.dc, self.b15, self.b20, self.w, self.r, self.u, self.b30, self.bc30, self.cost)

    def __repr__(self):
        return (
            f"Label(node={self.node}, d={self.d}, s={self.s}, dc={self.dc}, b15={self.b15}, b20={self.b20}, "
            f"w={self.w}, r={self.r}, u={self.u}, b30={self.b30}, bc30={self.bc30}, cost={self.cost})"
        )


def initial_label() -> Label:
    return Label(0, None, -1, 0, 0, 0, 0, 0, 0, 0, 0, False, False, 0)


def extend_label(
    lab: Label,
    head: int,
    arc: Arc,
    head_end: float,
    head_drive: int,
    head_cost: int,
    dual: float,
    variant: Variant,
    rules: RulesConfig,
) -> Label | None:
    """Extend ``lab`` over ``arc`` to node ``head``; None when a rule rejects it.

    ``head_end`` is the committed shift end of the head node (infinity for
    original nodes), ``head_drive``/``head_cost`` are zero for the sink.
    """
    R = rules
    length = arc.length
    if arc.inner:
        rd = (
            length >= R.break_one
            or (length >= R.break_two and lab.b20 >= 1)
            or (length >= R.break_three and lab.b15 >= 2)
        )
    else:
        rd = False
    if rd:
        dc, b15, b20 = head_drive, 0, 0
    elif arc.inner:
        dc = lab.dc + head_drive
        b15 = lab.b15 + (length >= R.break_three)
        b20 = lab.b20 + (length >= R.break_two)
    else:
        dc, b15, b20 = lab.dc + head_drive, lab.b15, lab.b20

    rest = arc.rest
    u, bc30, b30, r = lab.u, lab.bc30, lab.b30, lab.r
    if rest:
        r = min(r + rest, R.rest_required_long)
        if rest >= R.rest_long_part:
            b30 = True
        s_x = lab.s
        e = arc.tail_end
        unpaid_part = rest - max(R.unpaid_edge - s_x, 0) - max(e + rest - (head_end - R.unpaid_edge), 0)
        if unpaid_part >= R.rest_part_min:
            u = min(u + unpaid_part, variant.cap(R))
        centered_part = rest - max(R.centered_edge - s_x, 0) - max(e + rest - (head_end - R.centered_edge), 0)
        if centered_part >= R.rest_long_part:
            bc30 = True

    d = lab.d + head_drive
    s = lab.s + length + head_drive
    w = lab.w + lab.u - u + arc.remain + arc.ride + head_drive
    cost = lab.cost + R.weight_work * (lab.u - u) + arc.cost + head_cost - dual

    if d > R.drive_max or s > R.span_max or dc > R.drive_block_max or w > R.work_max:
        return None
    if w >= R.rest_first_deadline and r < R.rest_part_min:
        return None
    if variant is Variant.NO_B30 and w >= R.rest_first_deadline:
        return None
    if variant is Variant.UNCENTERED and bc30:
        return None
    y = Label(head, lab, -1, d, s, dc, b15, b20, w, r, u, b30, bc30, cost)
    if arc.head == SINK:
        if w > R.rest_tier_long and r < R.rest_required_long:
            return None
        if w >= R.rest_first_deadline and not b30:
            return None
        if not variant.accepts(b30, bc30):
            return None
        y.final = cost + R.weight_work * max(R.work_min - w, 0)
    else:
        y.leg = arc.head
    return y


def block_state(lab: Label) -> tuple[int, int]:
    """Canonical drive-block counters: (2, 0) and (2, 1) behave identically."""
    return (lab.b15, 0) if lab.b15 >= 2 else (lab.b15, lab.b20)


def dominates(a: Label, b: Label, variant: Variant, rules: RulesConfig, mode: str = "strengthened") -> bool:
    """Whether label ``a`` dominates ``b`` at the same node.

    Drive-block counters must agree (up to the (2,0)~(2,1) equivalence):
    higher counters alone do not dominate once a reset can happen earlier.
    Cost is compared on its part independent of working time, because the
    minimum-working-time term at the sink penalises lower working time.
    In the rest variants, spans below the centered window must agree since
    rest positions near the shift start depend on them.
    """
    if block_state(a) != block_state(b):
        return False
    if a.d > b.d or a.s > b.s or a.dc > b.dc:
        return False
    ga = a.cost - rules.weight_work * a.w
    gb = b.cost - rules.weight_work * b.w
    if ga > gb:
        return False
    if variant is Variant.NO_B30:
        return a.w <= b.w
    edge = rules.centered_edge
    if (a.s < edge or b.s < edge) and a.s != b.s:
        return False
    if a.r < b.r or (b.b30 and not a.b30) or (b.bc30 and not a.bc30):
        return False
    if mode == "base":
        return a.w + a.u <= b.w
    return a.w <= b.w and a.w + a.u <= b.w + b.u


def dominance_key(lab: Label, variant: Variant, rules: RulesConfig) -> tuple[tuple, tuple]:
    """(bucket, vector) so that strengthened dominance is bucket equality plus
    componentwise ``<=`` on the vector."""
    g = lab.cost - rules.weight_work * lab.w
    if variant is Variant.NO_B30:
        return block_state(lab), (lab.d, lab.s, lab.dc, lab.w, g)
    span_class = lab.s if lab.s < rules.centered_edge else -1
    vec = (lab.d, lab.s, lab.dc, -lab.r, lab.w, lab.w + lab.u, g, -int(lab.b30))
    if variant is Variant.CENTERED:
        vec += (-int(lab.bc30),)
    return block_state(lab) + (span_class,), vec
