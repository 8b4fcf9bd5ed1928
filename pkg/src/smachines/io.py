"""Machine-definition JSON codec (format 1) and trace output.

A machine file holds the hardware (named parts and tape alphabets), the
positive rules (part words as token strings, permission sets, locks as
empty lists), and optional input/accept templates.
"""

from __future__ import annotations

import json
from typing import Any

from .engine import Hardware, Rule, SMachine, make_rule

FORMAT = 1


class MachineFormatError(ValueError):
    pass


def machine_to_dict(m: SMachine) -> dict[str, Any]:
    hw = m.hw
    alph = hw.alphabet
    rules = []
    for r in m.positive_rules:
        parts = [{"lhs": hw.tokens(p.u), "rhs": hw.tokens(p.v)} for p in r.parts]
        perms: dict[str, list[str]] = {}
        for t, s in enumerate(r.perms):
            if s is not None:
                perms[hw.tape_names[t]] = sorted(alph.name(x) for x in s)
        entry: dict[str, Any] = {"name": r.name, "parts": parts}
        if perms:
            entry["permissions"] = perms
        rules.append(entry)
    out: dict[str, Any] = {
        "format": FORMAT,
        "name": m.name,
        "state_parts": [{"name": nm, "letters": [alph.name(x) for x in hw.parts[i]]}
                        for i, nm in enumerate(hw.part_names)],
        "tape_alphabets": [{"name": nm, "letters": [alph.name(x) for x in hw.tapes[i]]}
                           for i, nm in enumerate(hw.tape_names)],
        "rules": rules,
    }
    if m.input_template is not None:
        out["input_template"] = m.input_template
    if m.accept_word is not None:
        out["accept_word"] = hw.tokens(m.accept_word)
    if m.input_sectors:
        out["input_sectors"] = m.input_sectors
    if m.meta:
        out["meta"] = m.meta
    return out


def machine_from_dict(d: dict[str, Any]) -> SMachine:
    try:
        if d.get("format") != FORMAT:
            raise MachineFormatError(f"unsupported format {d.get('format')!r}, expected {FORMAT}")
        hw = Hardware(
            [(p["name"], p["letters"]) for p in d["state_parts"]],
            [(t["name"], t["letters"]) for t in d["tape_alphabets"]],
        )
        rules = []
        for r in d["rules"]:
            perms = None
            if "permissions" in r:
                perms = {k: list(v) for k, v in r["permissions"].items()}
            rules.append(make_rule(hw, r["name"],
                                   [(p["lhs"], p["rhs"]) for p in r["parts"]],
                                   perms))
        accept = None
        if "accept_word" in d:
            accept = hw.word(d["accept_word"])
        return SMachine(hw, rules, name=d.get("name", ""),
                        input_template=d.get("input_template"),
                        accept_word=accept,
                        input_sectors=d.get("input_sectors"),
                        meta=d.get("meta"))
    except (KeyError, TypeError) as e:
        raise MachineFormatError(f"malformed machine definition: {e!r}") from e


def dump_machine(m: SMachine, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(machine_to_dict(m), fh, indent=1)
        fh.write("\n")


def load_machine(path: str) -> SMachine:
    with open(path) as fh:
        return machine_from_dict(json.load(fh))


def trace_lines(comp) -> list[str]:
    """One JSON line per configuration with its history prefix."""
    out = []
    names: list[str] = []
    for i, w in enumerate(comp.trace):
        if i > 0:
            names.append(comp.history[i - 1].name)
        out.append(json.dumps({"step": i, "history": " ".join(names), "word": w.tokens()}))
    return out
