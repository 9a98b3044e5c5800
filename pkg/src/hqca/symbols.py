"""Register alphabets, construction tiers, and active-symbol sets.

The chain is a stack of registers over L sites.  Which registers exist
depends on the construction tier:

    I, II : program (P), data (D)
    III   : P, D, clock (C), clock pointer (CP)
    IV    : P, D, C, CP, target (T), second clock (C2)

Every symbol is a short string token.  Marked program symbols compose a
direction prefix, a gate letter and an optional "x" suffix ("→W", "←Sx"),
where the "x" family is the post-target mode that never touches the data
register again.
"""

from __future__ import annotations

TIERS = ("I", "II", "III", "IV")

# Register identifiers, in fixed row order used everywhere (snapshots,
# rule windows, config digests).
P, D, C, CP, T, C2 = "P", "D", "C", "CP", "T", "C2"
REGISTER_ORDER = (P, D, C, CP, T, C2)

REGISTERS_BY_TIER = {
    "I": (P, D),
    "II": (P, D),
    "III": (P, D, C, CP),
    "IV": (P, D, C, CP, T, C2),
}

GATES = ("W", "S", "I")

BULLET = "•"
TURN = "t"
GATE_APPLY = "g"
MOVE = "m"
QUANTUM = "?"  # data-row marker: amplitude lives in the work state, not a symbol


def marked(gate: str, arrow: str, cross: str = "") -> str:
    """Compose a marked program symbol, e.g. marked('W', '→') == '→W'."""
    return arrow + gate + cross


_P_TIER_I = ("W", "S", "I", "→W", "→S", "→I", GATE_APPLY, MOVE, BULLET, "→")
_P_TIER_II_EXTRA = (TURN, "←W", "←S", "←I", "▷", "←")
_P_TIER_III_EXTRA = ("⇓",)
_P_TIER_IV_EXTRA = ("→Ix", "→Sx", "→Wx", "mx", "→x",
                    "←Ix", "←Sx", "←Wx", "▷x", "←x", "⇓x")

PROGRAM_ALPHABET = {
    "I": _P_TIER_I,
    "II": _P_TIER_I + _P_TIER_II_EXTRA,
    "III": _P_TIER_I + _P_TIER_II_EXTRA + _P_TIER_III_EXTRA,
    "IV": _P_TIER_I + _P_TIER_II_EXTRA + _P_TIER_III_EXTRA + _P_TIER_IV_EXTRA,
}

DATA_ALPHABET = ("0", "1")
CLOCK_ALPHABET = (BULLET, "0", "1")

_CP_TIER_III = (BULLET, "X", "L", "R", "C")
_CP_TIER_IV_EXTRA = ("←C", "CX", "Rx", "Cx", "Lx")
CLOCK_POINTER_ALPHABET = {
    "III": _CP_TIER_III,
    "IV": _CP_TIER_III + _CP_TIER_IV_EXTRA,
}

TARGET_ALPHABET = (BULLET, "0", "1")
CLOCK2_ALPHABET = (BULLET, "0", "1")

# Active symbols.  Exactly one active symbol exists in every valid state,
# across the P and CP rows combined; its site is the active site.
ACTIVE_RIGHT = ("→", "→W", "→S", "→I", GATE_APPLY, MOVE)
ACTIVE_LEFT = ("←", "←W", "←S", "←I", "▷")
ACTIVE_RIGHT_X = ("→x", "→Wx", "→Sx", "→Ix", "mx")
ACTIVE_LEFT_X = ("←x", "←Wx", "←Sx", "←Ix", "▷x")

ACTIVE_P_BY_TIER = {
    "I": frozenset(ACTIVE_RIGHT),
    "II": frozenset(ACTIVE_RIGHT + ACTIVE_LEFT),
    "III": frozenset(ACTIVE_RIGHT + ACTIVE_LEFT + ("⇓",)),
    "IV": frozenset(ACTIVE_RIGHT + ACTIVE_LEFT + ("⇓",)
                    + ACTIVE_RIGHT_X + ACTIVE_LEFT_X + ("⇓x",)),
}

ACTIVE_CP_BY_TIER = {
    "I": frozenset(),
    "II": frozenset(),
    "III": frozenset(("L", "R", "C")),
    "IV": frozenset(("L", "R", "C", "←C", "CX", "Lx", "Rx", "Cx")),
}

# The union of all active symbols ever, used by the rule engine to locate
# candidate windows quickly.
ACTIVE_P_ALL = ACTIVE_P_BY_TIER["IV"]
ACTIVE_CP_ALL = ACTIVE_CP_BY_TIER["IV"]


def alphabet(register: str, tier: str):
    """Alphabet tuple of one register at the given tier."""
    if register == P:
        return PROGRAM_ALPHABET[tier]
    if register == D:
        return DATA_ALPHABET
    if register == C:
        return CLOCK_ALPHABET
    if register == CP:
        return CLOCK_POINTER_ALPHABET[tier]
    if register == T:
        return TARGET_ALPHABET
    if register == C2:
        return CLOCK2_ALPHABET
    raise ValueError(f"unknown register {register!r}")


# Local site dimensions quoted alongside the enumerated ones in the audit.
# The tier-III and tier-IV quoted totals use a program alphabet one symbol
# smaller than the enumerated symbol lists; the audit reports both values
# and flags the difference instead of silently picking one.
QUOTED_SITE_DIMENSION = {"I": 20, "III": 480, "IV": 14580}


def alphabet_dimension(tier: str) -> dict:
    """Per-register and total site dimension for a tier, with audit flags.

    Returns a dict with:
      per_register : {register: enumerated alphabet size}
      total        : product of the enumerated sizes
      quoted       : externally quoted total for this tier (None if none)
      match        : total == quoted (None if no quoted value)
      warnings     : list of audit notes for any discrepancy
    """
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}")
    per = {reg: len(alphabet(reg, tier)) for reg in REGISTERS_BY_TIER[tier]}
    total = 1
    for n in per.values():
        total *= n
    quoted = QUOTED_SITE_DIMENSION.get(tier)
    warnings = []
    if quoted is not None and total != quoted:
        warnings.append(
            f"tier {tier}: enumerated site dimension {total} != quoted {quoted}"
            " (program alphabet count differs by one symbol)")
    if tier in ("III", "IV"):
        warnings.append(
            "clock register taken as 3-dimensional {•,0,1}; the 4-dimensional"
            " variant with X is never used by any clock rule")
    return {
        "per_register": per,
        "total": total,
        "quoted": quoted,
        "match": None if quoted is None else total == quoted,
        "warnings": warnings,
    }


def format_dimension_audit(tier: str) -> str:
    """One-paragraph text form of alphabet_dimension, for CLI output."""
    audit = alphabet_dimension(tier)
    parts = [f"{reg}={n}" for reg, n in audit["per_register"].items()]
    line = f"tier {tier}: " + " x ".join(parts) + f" -> total {audit['total']}"
    if audit["quoted"] is not None:
        verdict = "MATCH" if audit["match"] else "MISMATCH (flagged)"
        line += f", quoted {audit['quoted']}: {verdict}"
    for w in audit["warnings"]:
        line += f"\n  warning: {w}"
    return line
