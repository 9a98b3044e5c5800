"""Two-site transition rules: declarative table, matcher, and rewriter.

Every rule is a record with a left-hand and right-hand side, each giving a
cell per register per window site.  Forward application matches the LHS and
writes the RHS; reverse application is generated mechanically by matching
the RHS and writing the LHS (with the gate side-effect replaced by its
adjoint).  Rules constrain only the registers they mention; everything else
is untouched.

Cell kinds
----------
  any          no constraint, value kept
  lit(s)       exact symbol
  not_(s)      any symbol except s (guard, value kept)
  gv(n)        unmarked gate variable: matches W/S/I, binds n
  mgv(n,ar,x)  marked gate variable: matches ar+G+x (e.g. '→W', '←Sx')
  bit(n)       matches '0'/'1' and binds n
  eq(n)        must equal the bound bit
  mis(n)       bit-compare failure cell: the negation of the bound bit, or
               '•' when the bound bit is 1 (a set clock bit above the
               target's padding is a genuine mismatch; '•' over a 0 bit is
               the padding-continues case and is not a mismatch)
  ok(n)        bit-compare success cell: the bound bit itself, or '•' when
               the bound bit is 0

Guard cells appear identically on both sides.  A window is the site pair
(i, i+1), 1-indexed.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import symbols as sym
from .state import ChainState, active_sites
from .symbols import BULLET, C, C2, CP, D, GATES, P, QUANTUM, T, TURN

FORWARD = "forward"
REVERSE = "reverse"

_FLIP = {"0": "1", "1": "0"}

# Register order inside a compiled check list; C must precede T so that bit
# variables bind on the clock before target cells test them.
_CHECK_ORDER = (P, CP, C, T, C2, D)


class RuleError(ValueError):
    pass


class NonClassicalGateError(RuleError):
    """A gate tried to push a classical data site off the basis states."""


class StaleMatchError(RuleError):
    """A Match no longer applies to the state it is being applied to."""


# -- cell constructors --------------------------------------------------------

ANY = ("any",)


def lit(s):
    return ("lit", s)


def not_(s):
    return ("not", s)


def gv(name):
    return ("gv", name)


def mgv(name, arrow, cross=""):
    return ("mgv", name, arrow, cross)


def bit(name):
    return ("bit", name)


def eq(name):
    return ("eq", name)


def mis(name):
    return ("mis", name)


def ok(name):
    return ("ok", name)


def _compile_checks(side):
    out = []
    for reg in _CHECK_ORDER:
        if reg in side:
            cl, cr = side[reg]
            if cl != ANY:
                out.append((reg, 0, cl))
            if cr != ANY:
                out.append((reg, 1, cr))
    return tuple(out)


class Rule:
    """One two-site rewrite rule; matching data is precompiled at build time."""

    __slots__ = ("label", "tier", "lhs", "rhs", "gate", "note", "_checks")

    def __init__(self, label, tier, lhs, rhs, gate=None, note=""):
        self.label = label
        self.tier = tier
        self.lhs = lhs
        self.rhs = rhs
        self.gate = gate
        self.note = note
        self._checks = {FORWARD: _compile_checks(lhs),
                        REVERSE: _compile_checks(rhs)}

    def __repr__(self):
        return f"<Rule {self.label} ({self.tier})>"

    def side(self, direction):
        return self.lhs if direction == FORWARD else self.rhs

    def out_side(self, direction):
        return self.rhs if direction == FORWARD else self.lhs

    def checks(self, direction):
        return self._checks[direction]

    def active_anchor(self, direction):
        """(symbols, offset) of the single active cell on the matched side."""
        anchors = []
        for reg, offset, cell in self.checks(direction):
            if reg == P:
                pool = sym.ACTIVE_P_ALL
            elif reg == CP:
                pool = sym.ACTIVE_CP_ALL
            else:
                continue
            if cell[0] == "lit" and cell[1] in pool:
                anchors.append(((cell[1],), offset))
            elif cell[0] == "mgv":
                _, _, arrow, cross = cell
                marked = tuple(arrow + g + cross for g in GATES)
                if all(m in pool for m in marked):
                    anchors.append((marked, offset))
        if len(anchors) != 1:
            raise RuleError(
                f"rule {self.label} {direction} side has {len(anchors)} active"
                " cells; need exactly 1")
        return anchors[0]


@dataclass(frozen=True)
class Match:
    rule: Rule
    site: int  # left site of the window
    direction: str
    bindings: tuple  # sorted (name, value) pairs

    @property
    def label(self):
        return self.rule.label

    def binding(self, name):
        return dict(self.bindings)[name]


def _r(label, tier, lhs, rhs, gate=None, note=""):
    return Rule(label, tier, lhs, rhs, gate, note)


def _build_rules_tier_I():
    A, B = gv("A"), gv("B")
    rA, rB = mgv("A", "→"), mgv("B", "→")
    return [
        _r("1", "I", {P: (lit("→"), A)}, {P: (lit(BULLET), rA)},
           note="mark the leading gate and enter the program"),
        _r("2", "I", {P: (rA, B)}, {P: (A, rB)},
           note="carry the mark one gate to the right"),
        _r("3", "I", {P: (rA, lit(BULLET))}, {P: (A, lit("→"))},
           note="mark exits the program on the right"),
        _r("4a", "I", {P: (lit("→"), lit(BULLET)), D: (lit("1"), ANY)},
           {P: (lit(sym.GATE_APPLY), lit(BULLET)), D: (lit("1"), ANY)},
           note="turning point over a 1 bit: apply gates on the way back"),
        _r("4b", "I", {P: (lit("→"), lit(BULLET)), D: (lit("0"), ANY)},
           {P: (lit(sym.MOVE), lit(BULLET)), D: (lit("0"), ANY)},
           note="turning point over a 0 bit: just shift the program"),
        _r("5a", "I", {P: (A, lit(sym.GATE_APPLY))},
           {P: (lit(sym.GATE_APPLY), A)}, gate="A",
           note="gate head moves left, applying each gate to its data window"),
        _r("5b", "I", {P: (A, lit(sym.MOVE))}, {P: (lit(sym.MOVE), A)},
           note="move head passes left without touching data"),
        _r("6a", "I", {P: (lit(BULLET), lit(sym.GATE_APPLY)), D: (lit("1"), ANY)},
           {P: (lit(BULLET), lit("→")), D: (lit("1"), ANY)},
           note="gate head reaches the left edge, rearm the arrow"),
        _r("6b", "I", {P: (lit(BULLET), lit(sym.MOVE)), D: (lit("0"), ANY)},
           {P: (lit(BULLET), lit("→")), D: (lit("0"), ANY)},
           note="move head reaches the left edge, rearm the arrow"),
    ]


def _build_rules_tier_II():
    A, B = gv("A"), gv("B")
    lA, lB = mgv("A", "←"), mgv("B", "←")
    return [
        _r("7", "II", {P: (A, lit("←"))}, {P: (lA, lit(BULLET))},
           note="leftward mark enters the program from the right"),
        _r("8", "II", {P: (B, lA)}, {P: (lB, A)},
           note="carry the leftward mark one gate to the left"),
        _r("9", "II", {P: (lit(BULLET), lA)}, {P: (lit("←"), A)},
           note="leftward mark exits the program on the left"),
        _r("10", "II", {P: (lit(BULLET), lit("←"))},
           {P: (lit(BULLET), lit("▷"))},
           note="left edge reached: start the rightward shuttle"),
        _r("11", "II", {P: (lit("▷"), A)}, {P: (A, lit("▷"))},
           note="shuttle drags the program one site to the left, no gates"),
        _r("12", "II", {P: (lit("▷"), lit(BULLET))}, {P: (lit("←"), lit(BULLET))},
           note="shuttle exits on the right and rearms the left arrow"),
        _r("13a", "II", {P: (lit("→"), lit(TURN))}, {P: (lit("←"), lit(TURN))},
           note="right arrow bounces off the right sentinel"),
        _r("13b", "II", {P: (lit(TURN), lit("←"))}, {P: (lit(TURN), lit("→"))},
           note="left arrow bounces off the left sentinel"),
    ]


def _build_rules_tier_III():
    return [
        # 13a is redefined: the bounce now hands control to the clock.
        _r("13a", "III", {P: (lit("→"), lit(TURN))}, {P: (lit(TURN), lit("⇓"))},
           note="right arrow converts to the clock hand-off symbol"),
        _r("14", "III", {P: (lit(TURN), lit("⇓")), CP: (lit(BULLET), lit("X"))},
           {P: (lit(TURN), lit(TURN)), CP: (lit(BULLET), lit("L"))},
           note="wake the clock pointer under the right sentinels"),
        _r("15", "III", {P: (lit(TURN), lit(TURN)), C: (ANY, lit("0")),
                         CP: (lit(BULLET), lit("L"))},
           {P: (lit(TURN), lit(TURN)), C: (ANY, lit("1")),
            CP: (lit(BULLET), lit("C"))},
           note="increment case: least significant bit 0 -> 1"),
        _r("16", "III", {P: (lit(TURN), lit(TURN)), C: (lit("0"), lit("1")),
                         CP: (lit(BULLET), lit("L"))},
           {P: (lit(TURN), lit(TURN)), C: (lit("1"), lit("0")),
            CP: (lit(BULLET), lit("C"))},
           note="increment case: trailing 01 -> 10 at the right edge"),
        _r("17", "III", {C: (lit("1"), lit("1")), CP: (lit(BULLET), lit("L"))},
           {C: (lit("1"), lit("1")), CP: (lit("L"), lit(BULLET))},
           note="carry scan hops left over a 1-run"),
        _r("18", "III", {P: (not_(TURN), ANY), C: (lit("0"), lit("1")),
                         CP: (lit(BULLET), lit("L"))},
           {P: (not_(TURN), ANY), C: (lit("1"), lit("0")),
            CP: (lit(BULLET), lit("R"))},
           note="carry lands: flip 01 -> 10 and turn around"),
        _r("19", "III", {P: (not_(TURN), ANY), C: (lit("0"), lit("1")),
                         CP: (lit("R"), lit(BULLET))},
           {P: (not_(TURN), ANY), C: (lit("0"), lit("0")),
            CP: (lit(BULLET), lit("R"))},
           note="return sweep clears the 1-run bit by bit"),
        _r("20", "III", {P: (lit(TURN), lit(TURN)), C: (lit("0"), lit("1")),
                         CP: (lit("R"), lit(BULLET))},
           {P: (lit(TURN), lit(TURN)), C: (lit("0"), lit("0")),
            CP: (lit(BULLET), lit("C"))},
           note="return sweep clears the last bit and completes"),
        _r("21", "III", {P: (lit(TURN), lit(TURN)), CP: (lit(BULLET), lit("C"))},
           {P: (lit("←"), lit(TURN)), CP: (lit(BULLET), lit("X"))},
           note="clock done: hand the active symbol back to the program"),
    ]


def _build_rules_tier_IV():
    A, B = gv("A"), gv("B")
    rAx, rBx = mgv("A", "→", "x"), mgv("B", "→", "x")
    lAx, lBx = mgv("A", "←", "x"), mgv("B", "←", "x")
    a = "a"
    tt = (lit(TURN), lit(TURN))
    rules = [
        # 21 is redefined: control returns to the program off a failed
        # comparison (CX), never directly off C, which now starts the sweep.
        _r("21", "IV", {P: tt, CP: (lit(BULLET), lit("CX"))},
           {P: (lit("←"), lit(TURN)), CP: (lit(BULLET), lit("X"))},
           note="comparison failed: run the next application"),
        _r("22", "IV", {P: tt, CP: (lit(BULLET), lit("Cx"))},
           {P: (lit("←x"), lit(TURN)), CP: (lit(BULLET), lit("X"))},
           note="post-target bookkeeping done: run a crossed application"),
        _r("23a", "IV", {P: tt, C: (not_(BULLET), bit(a)),
                         CP: (lit(BULLET), lit("C")), T: (not_(BULLET), eq(a))},
           {P: tt, C: (not_(BULLET), bit(a)),
            CP: (lit("←C"), lit(BULLET)), T: (not_(BULLET), eq(a))},
           note="start compare sweep: LSB matches, more digits to the left"),
        _r("23b", "IV", {P: tt, C: (not_(BULLET), bit(a)),
                         CP: (lit(BULLET), lit("C")), T: (lit(BULLET), eq(a))},
           {P: tt, C: (not_(BULLET), bit(a)),
            CP: (lit("←C"), lit(BULLET)), T: (lit(BULLET), eq(a))},
           note="start compare sweep: LSB matches a one-digit target"),
        _r("23c", "IV", {P: tt, C: (lit(BULLET), bit(a)),
                         CP: (lit(BULLET), lit("C")), T: (not_(BULLET), eq(a))},
           {P: tt, C: (lit(BULLET), bit(a)),
            CP: (lit("←C"), lit(BULLET)), T: (not_(BULLET), eq(a))},
           note="start-sweep variant over the clock edge; unreachable on"
                " built chains (clock bits never abut the sweep start)"),
        _r("24a", "IV", {P: (not_(TURN), ANY), C: (not_(BULLET), bit(a)),
                         CP: (lit(BULLET), lit("←C")), T: (not_(BULLET), eq(a))},
           {P: (not_(TURN), ANY), C: (not_(BULLET), bit(a)),
            CP: (lit("←C"), lit(BULLET)), T: (not_(BULLET), eq(a))},
           note="sweep hop: digit matches, more digits to the left"),
        _r("24b", "IV", {P: (not_(TURN), ANY), C: (not_(BULLET), bit(a)),
                         CP: (lit(BULLET), lit("←C")), T: (lit(BULLET), eq(a))},
           {P: (not_(TURN), ANY), C: (not_(BULLET), bit(a)),
            CP: (lit("←C"), lit(BULLET)), T: (lit(BULLET), eq(a))},
           note="sweep hop onto the target's padding boundary"),
        _r("24c", "IV", {P: (not_(TURN), ANY), C: (lit(BULLET), bit(a)),
                         CP: (lit(BULLET), lit("←C")), T: (not_(BULLET), eq(a))},
           {P: (not_(TURN), ANY), C: (lit(BULLET), bit(a)),
            CP: (lit("←C"), lit(BULLET)), T: (not_(BULLET), eq(a))},
           note="sweep-hop variant over the clock edge; unreachable on built"
                " chains (the left sentinel sits over the clock edge)"),
        _r("25", "IV", {P: tt, C: (ANY, bit(a)),
                        CP: (lit(BULLET), lit("C")), T: (ANY, mis(a))},
           {P: tt, C: (ANY, bit(a)),
            CP: (lit(BULLET), lit("CX")), T: (ANY, mis(a))},
           note="LSB differs from the target: flag the failure"),
        _r("26", "IV", {P: (not_(TURN), ANY), C: (ANY, bit(a)),
                        CP: (lit(BULLET), lit("←C")), T: (ANY, mis(a))},
           {P: (not_(TURN), ANY), C: (ANY, bit(a)),
            CP: (lit(BULLET), lit("CX")), T: (ANY, mis(a))},
           note="sweep finds a differing digit: flag the failure"),
        _r("27", "IV", {C: (ANY, bit(a)), CP: (lit("CX"), lit(BULLET)),
                        T: (ANY, ok(a))},
           {C: (ANY, bit(a)), CP: (lit(BULLET), lit("CX")), T: (ANY, ok(a))},
           note="failure flag returns right over already-matched digits"),
        _r("28", "IV", {C: (lit(BULLET), bit(a)),
                        CP: (lit(BULLET), lit("←C")), T: (lit(BULLET), eq(a))},
           {C: (lit(BULLET), bit(a)),
            CP: (lit(BULLET), lit("Rx")), T: (lit(BULLET), eq(a))},
           note="full-width match completes against the chain edge;"
                " unreachable on built chains (padding keeps a bullet column"
                " left of the digits)"),
        _r("29", "IV", {P: (not_(TURN), ANY), C: (ANY, lit("0")),
                        CP: (lit(BULLET), lit("←C")),
                        T: (lit(BULLET), lit(BULLET)), C2: (ANY, lit("1"))},
           {P: (not_(TURN), ANY), C: (ANY, lit("0")),
            CP: (lit("←C"), lit(BULLET)),
            T: (lit(BULLET), lit(BULLET)), C2: (ANY, lit("1"))},
           note="sweep crosses naturally-padded target cells over clock 0s;"
                " unreachable on built chains (digits are zero-padded to the"
                " bullet column)"),
        _r("30", "IV", {C: (ANY, lit("0")), CP: (lit(BULLET), lit("←C")),
                        T: (ANY, lit(BULLET)), C2: (lit(BULLET), lit("0"))},
           {C: (ANY, lit("0")), CP: (lit(BULLET), lit("Rx")),
            T: (ANY, lit(BULLET)), C2: (lit(BULLET), lit("0"))},
           note="every digit matched: the sweep stands on the bullet column"
                " and converts to the crossed return mode"),
        # Crossed oscillations: rules 1-12 with crossed symbols, no data
        # conditions and no gate applications, ever.
        _r("31", "IV", {P: (lit("→x"), A)}, {P: (lit(BULLET), rAx)}),
        _r("32", "IV", {P: (rAx, B)}, {P: (A, rBx)}),
        _r("33", "IV", {P: (rAx, lit(BULLET))}, {P: (A, lit("→x"))}),
        _r("34", "IV", {P: (lit("→x"), lit(BULLET))},
           {P: (lit("mx"), lit(BULLET))},
           note="crossed turning point: always shift, never apply gates"),
        _r("35", "IV", {P: (A, lit("mx"))}, {P: (lit("mx"), A)}),
        _r("36", "IV", {P: (lit(BULLET), lit("mx"))},
           {P: (lit(BULLET), lit("→x"))}),
        _r("37", "IV", {P: (A, lit("←x"))}, {P: (lAx, lit(BULLET))}),
        _r("38", "IV", {P: (B, lAx)}, {P: (lBx, A)}),
        _r("39", "IV", {P: (lit(BULLET), lAx)}, {P: (lit("←x"), A)}),
        _r("40", "IV", {P: (lit(BULLET), lit("←x"))},
           {P: (lit(BULLET), lit("▷x"))}),
        _r("41", "IV", {P: (lit("▷x"), A)}, {P: (A, lit("▷x"))}),
        _r("42", "IV", {P: (lit("▷x"), lit(BULLET))},
           {P: (lit("←x"), lit(BULLET))}),
        _r("43a", "IV", {P: (lit("→x"), lit(TURN))}, {P: (lit(TURN), lit("⇓x"))}),
        _r("43b", "IV", {P: (lit(TURN), lit("←x"))}, {P: (lit(TURN), lit("→x"))}),
        # Crossed clock: rules 14-20 acting on the second clock register.
        _r("44", "IV", {P: (lit(TURN), lit("⇓x")), CP: (lit(BULLET), lit("X"))},
           {P: (lit(TURN), lit(TURN)), CP: (lit(BULLET), lit("Lx"))}),
        _r("45", "IV", {P: tt, CP: (lit(BULLET), lit("Lx")), C2: (ANY, lit("0"))},
           {P: tt, CP: (lit(BULLET), lit("Cx")), C2: (ANY, lit("1"))}),
        _r("46", "IV", {P: tt, CP: (lit(BULLET), lit("Lx")),
                        C2: (lit("0"), lit("1"))},
           {P: tt, CP: (lit(BULLET), lit("Cx")), C2: (lit("1"), lit("0"))}),
        _r("47", "IV", {CP: (lit(BULLET), lit("Lx")), C2: (lit("1"), lit("1"))},
           {CP: (lit("Lx"), lit(BULLET)), C2: (lit("1"), lit("1"))}),
        _r("48", "IV", {P: (not_(TURN), ANY), CP: (lit(BULLET), lit("Lx")),
                        C2: (lit("0"), lit("1"))},
           {P: (not_(TURN), ANY), CP: (lit(BULLET), lit("Rx")),
            C2: (lit("1"), lit("0"))}),
        _r("49", "IV", {P: (not_(TURN), ANY), CP: (lit("Rx"), lit(BULLET)),
                        C2: (lit("0"), lit("1"))},
           {P: (not_(TURN), ANY), CP: (lit(BULLET), lit("Rx")),
            C2: (lit("0"), lit("0"))}),
        _r("50", "IV", {P: tt, CP: (lit("Rx"), lit(BULLET)),
                        C2: (lit("0"), lit("1"))},
           {P: tt, CP: (lit(BULLET), lit("Cx")), C2: (lit("0"), lit("0"))}),
    ]
    return rules


class RuleSet:
    """Effective rule list for one tier, with active-symbol match indexes.

    Immutable once built and safe to share between threads; scans return
    matches in deterministic (site, label) order regardless of how the
    candidate windows were enumerated.
    """

    def __init__(self, tier: str, rules):
        self.tier = tier
        self.rules = tuple(rules)
        self.by_label = {r.label: r for r in self.rules}
        self._index = {FORWARD: {}, REVERSE: {}}
        for rule in self.rules:
            for direction in (FORWARD, REVERSE):
                symbols, offset = rule.active_anchor(direction)
                for s in symbols:
                    self._index[direction].setdefault(s, []).append((rule, offset))

    def labels(self):
        return tuple(r.label for r in self.rules)

    def candidates(self, direction, active_symbol):
        return self._index[direction].get(active_symbol, ())

    def without(self, *labels) -> "RuleSet":
        """Copy with some rules removed (for negative-control experiments)."""
        drop = set(labels)
        return RuleSet(self.tier, [r for r in self.rules if r.label not in drop])


_RULESET_CACHE = {}


def rule_set(tier: str) -> RuleSet:
    """The effective rules of a tier, with later tiers' redefinitions applied."""
    if tier in _RULESET_CACHE:
        return _RULESET_CACHE[tier]
    rules = {r.label: r for r in _build_rules_tier_I()}
    if tier in ("II", "III", "IV"):
        for r in _build_rules_tier_II():
            rules[r.label] = r
    if tier in ("III", "IV"):
        for r in _build_rules_tier_III():
            rules[r.label] = r  # replaces the tier-II 13a
    if tier == "IV":
        for r in _build_rules_tier_IV():
            rules[r.label] = r  # replaces the tier-III 21
    ordered = sorted(rules.values(), key=_label_sort_key)
    rs = RuleSet(tier, ordered)
    _RULESET_CACHE[tier] = rs
    return rs


def _label_sort_key(rule: Rule):
    num = "".join(ch for ch in rule.label if ch.isdigit())
    suffix = rule.label[len(num):]
    return (int(num), suffix)


# -- matching -----------------------------------------------------------------


def _read_cell(state: ChainState, reg: str, site: int) -> str:
    if reg == D:
        return state.data_bit(site)
    row = state.rows.get(reg)
    return row[site - 1] if row is not None else None


def try_match(rule: Rule, state: ChainState, i: int, direction: str):
    """Bindings dict if the rule matches window (i, i+1), else None."""
    if not 1 <= i <= state.L - 1:
        return None
    bindings = {}
    for reg, offset, cell in rule.checks(direction):
        v = _read_cell(state, reg, i + offset)
        if v is None:
            return None
        kind = cell[0]
        if kind == "lit":
            if v != cell[1]:
                return None
        elif kind == "not":
            if v == cell[1]:
                return None
        elif kind == "gv":
            if v not in GATES:
                return None
            name = cell[1]
            if bindings.setdefault(name, v) != v:
                return None
        elif kind == "mgv":
            _, name, arrow, cross = cell
            g = v[len(arrow):len(arrow) + 1]
            if g not in GATES or v != arrow + g + cross:
                return None
            if bindings.setdefault(name, g) != g:
                return None
        elif kind == "bit":
            if v not in ("0", "1"):
                return None
            name = cell[1]
            if bindings.setdefault(name, v) != v:
                return None
        elif kind == "eq":
            if v != bindings.get(cell[1]):
                return None
        elif kind == "mis":
            b = bindings.get(cell[1])
            if not (v == _FLIP.get(b) or (b == "1" and v == BULLET)):
                return None
        elif kind == "ok":
            b = bindings.get(cell[1])
            if not (v == b or (b == "0" and v == BULLET)):
                return None
    return bindings


def applicable(state: ChainState, direction: str, rules: RuleSet | None = None,
               full_scan: bool = False):
    """All matches of the tier's rules on the state, ordered by (site, label).

    The default path only inspects windows touching an active symbol, which
    is equivalent to the full scan because every rule side anchors exactly
    one active symbol; full_scan=True forces the literal window-by-window
    scan (used by the test suite to validate the shortcut).
    """
    rs = rules if rules is not None else rule_set(state.tier)
    found = []
    seen = set()
    if full_scan:
        for rule in rs.rules:
            for i in range(1, state.L):
                b = try_match(rule, state, i, direction)
                if b is not None:
                    found.append(Match(rule, i, direction, tuple(sorted(b.items()))))
        found.sort(key=lambda m: (m.site, _label_sort_key(m.rule)))
        return found
    for site, _reg, s in active_sites(state):
        for rule, offset in rs.candidates(direction, s):
            i = site - offset
            key = (rule.label, i)
            if key in seen:
                continue
            seen.add(key)
            b = try_match(rule, state, i, direction)
            if b is not None:
                found.append(Match(rule, i, direction, tuple(sorted(b.items()))))
    found.sort(key=lambda m: (m.site, _label_sort_key(m.rule)))
    return found


# -- rewriting ----------------------------------------------------------------


def classical_gate_action(kind: str, left_bit: str, right_bit: str):
    """Effect of one gate on two classical bits, or None when it would
    create superposition (W with a set control)."""
    if kind == "I":
        return (left_bit, right_bit)
    if kind == "S":
        return (right_bit, left_bit)
    if kind == "W":
        if left_bit == "0":
            return (left_bit, right_bit)
        return None
    raise RuleError(f"unknown gate {kind!r}")


def _instantiate(cell, bindings, current):
    kind = cell[0]
    if kind == "lit":
        return cell[1]
    if kind == "gv":
        return bindings[cell[1]]
    if kind == "mgv":
        _, name, arrow, cross = cell
        return arrow + bindings[name] + cross
    return current  # any / guards keep the current symbol


def _apply_gate_effect(state: ChainState, kind: str, i: int, adjoint: bool,
                       promote: bool):
    """Apply a bound gate to data sites (i, i+1); returns (rows_patch, work)."""
    if state.dense:
        return {}, state.work.apply_gate(kind, i, i + 1, adjoint)
    d = state.rows[D]
    lb, rb = d[i - 1], d[i]
    if lb != QUANTUM and rb != QUANTUM:
        res = classical_gate_action(kind, lb, rb)
        if res is not None:
            if res == (lb, rb):
                return {}, state.work
            nd = list(d)
            nd[i - 1], nd[i] = res
            return {D: tuple(nd)}, state.work
    elif kind == "I":
        return {}, state.work
    elif lb == QUANTUM and rb == QUANTUM:
        return {}, state.work.apply_gate(kind, i, i + 1, adjoint)
    if not promote:
        raise NonClassicalGateError(
            f"gate {kind} on data sites ({i},{i + 1}) = ({lb},{rb}) leaves the"
            " computational basis; valid chains never do this")
    ws = state.work
    nd = list(d)
    for site, b in ((i, lb), (i + 1, rb)):
        if b != QUANTUM:
            ws = ws.promote(site, b)
            nd[site - 1] = QUANTUM
    return {D: tuple(nd)}, ws.apply_gate(kind, i, i + 1, adjoint)


def apply(state: ChainState, match: Match, promote: bool = False) -> ChainState:
    """Rewrite the state at the matched window; gates run on the data qubits.

    Raises StaleMatchError when the match no longer fits the state and
    NonClassicalGateError when a gate would break the classical data
    invariant (promote=True instead grows the quantum support).
    """
    rule, i, direction = match.rule, match.site, match.direction
    fresh = try_match(rule, state, i, direction)
    if fresh is None or tuple(sorted(fresh.items())) != match.bindings:
        raise StaleMatchError(f"rule {rule.label} no longer matches at {i}")
    bindings = dict(match.bindings)
    out = rule.out_side(direction)
    patch = {}
    for reg, (cl, cr) in out.items():
        if reg == D:
            # data cells only ever appear as guards; gates are the one
            # channel that rewrites data
            for off, cell in ((0, cl), (1, cr)):
                cur = state.data_bit(i + off)
                if _instantiate(cell, bindings, cur) != cur:
                    raise RuleError("rules must not rewrite data cells directly")
            continue
        row = list(state.rows[reg])
        row[i - 1] = _instantiate(cl, bindings, row[i - 1])
        row[i] = _instantiate(cr, bindings, row[i])
        patch[reg] = tuple(row)
    work = state.work
    if rule.gate is not None:
        gate_patch, work = _apply_gate_effect(
            state, bindings[rule.gate], i, direction == REVERSE, promote)
        patch.update(gate_patch)
    return state.replace(rows=patch, work=work)


# -- audit dump ----------------------------------------------------------------


def _cell_text(cell):
    kind = cell[0]
    if kind == "any":
        return "-"
    if kind == "lit":
        return cell[1]
    if kind == "not":
        return "!" + cell[1]
    if kind == "gv":
        return cell[1]
    if kind == "mgv":
        return cell[2] + cell[1] + cell[3]
    if kind == "bit":
        return cell[1]
    if kind == "eq":
        return "=" + cell[1]
    if kind == "mis":
        return "~" + cell[1]
    if kind == "ok":
        return "ok(" + cell[1] + ")"
    raise RuleError(kind)


def _side_text(side):
    parts = []
    for reg in sym.REGISTER_ORDER:
        if reg in side:
            cl, cr = side[reg]
            parts.append(f"{reg}:{_cell_text(cl)}/{_cell_text(cr)}")
    return " ".join(parts)


def dump_rule_table(tier: str) -> str:
    """One line per rule: `<id> <tier> | <lhs> => <rhs> [gate:A]`."""
    lines = []
    for rule in rule_set(tier).rules:
        line = (f"{rule.label} {rule.tier} | {_side_text(rule.lhs)}"
                f" => {_side_text(rule.rhs)}")
        if rule.gate:
            line += f" [gate:{rule.gate}]"
        lines.append(line)
    return "\n".join(lines)
