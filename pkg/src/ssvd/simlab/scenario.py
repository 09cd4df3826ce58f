"""Scenario files: INI with a ``[scenario]`` section and an optional ``[fit]``.

Example::

    [scenario]
    name = table1_d100_gauss
    n = 1024
    p = 2048
    rank = 1
    singular_values = 100
    u_signals = peak
    v_signals = poly
    noise = gauss_unit
    reps = 20
    seed = 1

    [fit]
    threshold = hard
"""
import configparser
from importlib import resources
from pathlib import Path
import re

from ..core import SsvdConfig
from ..thresholds import ThresholdKind
from .model import Scenario

SCENARIO_KEYS = {
    "name": str, "n": int, "p": int, "rank": int, "singular_values": "floats",
    "u_signals": "names", "v_signals": "names", "noise": str, "reps": int, "seed": int,
}
FIT_KEYS = {
    "threshold": str, "epsilon": float, "max_iters": int, "beta": float,
    "alpha": float, "boot": int, "scad_a": float,
}


class ScenarioError(ValueError):
    """Invalid scenario file; the message names the line and field."""


def _line_of(text, section, key):
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        head = re.match(r"\s*\[(.+)\]\s*$", line)
        if head:
            current = head.group(1).strip()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return i
    return None


def _convert(raw, kind):
    if kind == "floats":
        return tuple(float(t) for t in re.split(r"[,\s]+", raw.strip()) if t)
    if kind == "names":
        return tuple(t for t in re.split(r"[,\s]+", raw.strip()) if t)
    return kind(raw)


def parse_scenario(text, source="<scenario>"):
    """Parse scenario text into a validated :class:`Scenario`.

    Raises
    ------
    ScenarioError
        Syntax errors, unknown or malformed fields and failed validation,
        with ``source:line`` where the offending field sits.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as err:
        raise ScenarioError(f"{source}: {err}") from err
    if not parser.has_section("scenario"):
        raise ScenarioError(f"{source}: missing [scenario] section")
    unknown = [s for s in parser.sections() if s not in ("scenario", "fit")]
    if unknown:
        raise ScenarioError(f"{source}: unknown section [{unknown[0]}]")

    def where(section, key):
        line = _line_of(text, section, key)
        return f"{source}:{line}" if line else source

    def read(section, keys):
        values = {}
        if not parser.has_section(section):
            return values
        for key, raw in parser.items(section):
            if key not in keys:
                raise ScenarioError(f"{where(section, key)}: unknown field {key!r} in [{section}]")
            try:
                values[key] = _convert(raw, keys[key])
            except ValueError as err:
                raise ScenarioError(f"{where(section, key)}: bad value for {key!r}: {raw!r} ({err})") from err
        return values

    sc = read("scenario", SCENARIO_KEYS)
    ft = read("fit", FIT_KEYS)
    try:
        kind = ThresholdKind(ft.pop("threshold", "hard"), ft.pop("scad_a", 3.7))
        if "boot" in ft:
            ft["m_boot"] = ft.pop("boot")
        config = SsvdConfig(rank=sc.get("rank", 1), kind=kind, **ft)
    except ValueError as err:
        raise ScenarioError(f"{_locate(str(err), parser, 'fit', where, source)}: {err}") from err
    try:
        return Scenario(fit=config, **sc)
    except ValueError as err:
        raise ScenarioError(f"{_locate(str(err), parser, 'scenario', where, source)}: {err}") from err


_ALIASES = {"m_boot": "boot", "thresholding rule": "threshold", "SCAD parameter": "scad_a"}


def _locate(message, parser, section, where, source):
    # position of the first field of the section that the message mentions
    if not parser.has_section(section):
        return source
    for phrase, key in _ALIASES.items():
        if phrase in message and key in parser[section]:
            return where(section, key)
    for key in parser[section]:
        if re.search(rf"(?<![\w]){re.escape(key)}(?![\w])", message):
            return where(section, key)
    return source


def bundled_names():
    root = resources.files("ssvd").joinpath("scenarios")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load_scenario(ref):
    """Load a scenario from a file path or by bundled name."""
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path.read_text(), str(path))
    res = resources.files("ssvd").joinpath("scenarios", f"{ref}.ini")
    if res.is_file():
        return parse_scenario(res.read_text(), f"{ref}.ini")
    raise FileNotFoundError(f"no scenario file {ref!r} and no bundled scenario of that name "
                            f"(bundled: {', '.join(bundled_names())})")
