"""Run configuration files: line-oriented sections of ``key = value`` pairs.

Grammar (complete examples ship in ``configs/``)::

    # comment lines start with '#'; blank lines are ignored
    [map]                      # or [system] or [lienard] -- exactly one
    x = "2*x*(1 + y*y)"        # expression values are double-quoted
    y = "y/3"

    [region]
    x0 = -1.5                  # bare values parse as numbers,
    x1 = 1.5                   # true/false, none, or plain words
    y0 = -1.5
    y1 = 1.5

    [certify]
    declared_symmetry = D2
    epsilon = 1

Sections and keys:

``[map]``
    ``x``, ``y`` (image formulas, required), optional ``inverse_x`` and
    ``inverse_y`` (both or neither), optional ``name``.
``[system]``
    ``x``, ``y`` (rate formulas in x, y, t), ``period``; optional ``name``,
    ``start_x``/``start_y`` (search start for the periodic point, default 0)
    and ``atol``/``rtol`` overrides for the return-map integration.
``[lienard]``
    ``friction``, ``restoring``, ``forcing`` (one-variable formulas),
    ``period``; the same optional keys as ``[system]``.
``[region]``
    ``x0 < x1``, ``y0 < y1``.  Optional when the command line supplies
    ``--region``.
``[certify]``
    Any field of :class:`saddlekit.certify.CertifyConfig` by name, e.g.
    ``declared_symmetry``, ``epsilon``, ``census_grid``, ``grow_manifolds``.
``[portrait]``
    ``orbit_count``, ``orbit_steps``, ``width`` (pixels).
``[run]``
    ``seed`` (default 42) for the sampled-orbit overlay.

Every expression field must parse and every numeric field must be finite;
violations raise :class:`ConfigError` with the file line that caused them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .certify import CertifyConfig
from .expressions import ExpressionSyntaxError, parse
from .planarmap import Region

__all__ = [
    "ConfigError",
    "PortraitSettings",
    "Config",
    "load_config",
    "parse_config",
    "parse_region_spec",
]

DEFAULT_SEED = 42

_DYNAMICS_SECTIONS = ("map", "system", "lienard")

# section -> (required keys, optional keys)
_SCHEMA: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "map": (("x", "y"), ("inverse_x", "inverse_y", "name")),
    "system": (("x", "y", "period"), ("name", "start_x", "start_y", "atol", "rtol")),
    "lienard": (
        ("friction", "restoring", "forcing", "period"),
        ("name", "start_x", "start_y", "atol", "rtol"),
    ),
    "region": (("x0", "x1", "y0", "y1"), ()),
    "certify": (
        (),
        (
            "declared_symmetry",
            "epsilon",
            "census_grid",
            "spectrum_samples",
            "symmetry_samples",
            "symmetry_tol",
            "quadrant_samples",
            "grow_manifolds",
            "manifold_budget",
            "manifold_max_windows",
            "contact_tol",
        ),
    ),
    "portrait": ((), ("orbit_count", "orbit_steps", "width")),
    "run": ((), ("seed",)),
}

_EXPRESSION_KEYS = {
    ("map", "x"),
    ("map", "y"),
    ("map", "inverse_x"),
    ("map", "inverse_y"),
    ("system", "x"),
    ("system", "y"),
    ("lienard", "friction"),
    ("lienard", "restoring"),
    ("lienard", "forcing"),
}


class ConfigError(ValueError):
    """A config file that cannot be used, with the line that offends."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if line_no else message)


@dataclass(frozen=True)
class PortraitSettings:
    orbit_count: int = 40
    orbit_steps: int = 12
    width: int = 640


@dataclass
class Config:
    """A parsed, validated run configuration.

    ``dynamics`` holds the raw values of the one dynamics section present
    (expression values still as source strings — building maps is the
    command's job); ``kind`` names that section.
    """

    kind: str  # "map" | "system" | "lienard"
    dynamics: dict[str, object]
    region: Region | None
    certify: CertifyConfig
    portrait: PortraitSettings = field(default_factory=PortraitSettings)
    seed: int = DEFAULT_SEED

    @property
    def name(self) -> str:
        return str(self.dynamics.get("name", self.kind))


def _parse_value(raw: str, line_no: int) -> object:
    if raw.startswith('"'):
        if len(raw) < 2 or not raw.endswith('"'):
            raise ConfigError(f"unterminated quoted value {raw!r}", line_no)
        return raw[1:-1]
    low = raw.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    if low == "none":
        return None
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        val = float(raw)
    except ValueError:
        return raw  # bare word, e.g. D2 or kappa-x
    if not math.isfinite(val):
        raise ConfigError(f"numeric value must be finite, got {raw!r}", line_no)
    return val


def _read_sections(text: str) -> dict[str, dict[str, tuple[object, int]]]:
    sections: dict[str, dict[str, tuple[object, int]]] = {}
    current: dict[str, tuple[object, int]] | None = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", line_no)
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ConfigError(
                    f"unknown section [{name}]; expected one of "
                    + ", ".join(f"[{s}]" for s in _SCHEMA),
                    line_no,
                )
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", line_no)
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line_no)
        if current is None:
            raise ConfigError("key outside any [section]", line_no)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key in current:
            raise ConfigError(f"duplicate key {key!r}", line_no)
        current[key] = (_parse_value(raw, line_no), line_no)
    return sections


def _check_keys(section: str, entries: dict[str, tuple[object, int]]) -> None:
    required, optional = _SCHEMA[section]
    for key, (_, line_no) in entries.items():
        if key not in required and key not in optional:
            raise ConfigError(f"unknown key {key!r} in [{section}]", line_no)
    for key in required:
        if key not in entries:
            raise ConfigError(f"[{section}] is missing required key {key!r}")


def _typed(section: str, entries: dict[str, tuple[object, int]], key: str, kinds,
           default=None):
    if key not in entries:
        return default
    value, line_no = entries[key]
    if isinstance(value, bool) and bool not in (
        kinds if isinstance(kinds, tuple) else (kinds,)
    ):
        raise ConfigError(f"{key!r} must not be a boolean", line_no)
    if not isinstance(value, kinds):
        want = " or ".join(
            k.__name__ for k in (kinds if isinstance(kinds, tuple) else (kinds,))
        )
        raise ConfigError(f"{key!r} must be {want}, got {value!r}", line_no)
    return value


def _checked_expression(section: str, entries, key: str) -> str:
    src, line_no = entries[key]
    if not isinstance(src, str):
        raise ConfigError(f"{key!r} must be a quoted expression string", line_no)
    try:
        parse(src)
    except ExpressionSyntaxError as err:
        raise ConfigError(f"{key!r}: {err}", line_no) from err
    return src


def parse_region_spec(spec: str) -> Region:
    """``"x0,x1,y0,y1"`` (as on the command line) to a :class:`Region`."""
    parts = [p.strip() for p in spec.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"region must be four comma-separated numbers, got {spec!r}")
    try:
        x0, x1, y0, y1 = (float(p) for p in parts)
    except ValueError as err:
        raise ConfigError(f"region {spec!r}: {err}") from err
    if not all(math.isfinite(v) for v in (x0, x1, y0, y1)):
        raise ConfigError(f"region {spec!r} must be finite")
    if not (x0 < x1 and y0 < y1):
        raise ConfigError(f"region {spec!r} is degenerate (need x0 < x1 and y0 < y1)")
    return Region(x0, x1, y0, y1)


def parse_config(text: str) -> Config:
    """Parse and validate config text; raise :class:`ConfigError` if unusable."""
    sections = _read_sections(text)
    present = [s for s in _DYNAMICS_SECTIONS if s in sections]
    if len(present) != 1:
        raise ConfigError(
            "exactly one of [map], [system] or [lienard] is required"
            + (f"; found {', '.join('[' + s + ']' for s in present)}" if present else "")
        )
    kind = present[0]
    for name, entries in sections.items():
        _check_keys(name, entries)

    dyn_entries = sections[kind]
    dynamics: dict[str, object] = {}
    for key in dyn_entries:
        if (kind, key) in _EXPRESSION_KEYS:
            dynamics[key] = _checked_expression(kind, dyn_entries, key)
        else:
            dynamics[key] = dyn_entries[key][0]
    if kind == "map" and (("inverse_x" in dynamics) != ("inverse_y" in dynamics)):
        raise ConfigError("[map] inverse needs both inverse_x and inverse_y")
    if kind in ("system", "lienard"):
        period = _typed(kind, dyn_entries, "period", (int, float))
        if not (isinstance(period, (int, float)) and period > 0):
            raise ConfigError(f"[{kind}] period must be a positive number, got {period!r}")
        for key in ("start_x", "start_y", "atol", "rtol"):
            _typed(kind, dyn_entries, key, (int, float))
    if "name" in dynamics and not isinstance(dynamics["name"], str):
        raise ConfigError(f"[{kind}] name must be a word or quoted string")

    region = None
    if "region" in sections:
        ent = sections["region"]
        vals = [_typed("region", ent, k, (int, float)) for k in ("x0", "x1", "y0", "y1")]
        try:
            region = Region(*(float(v) for v in vals))
        except ValueError as err:
            raise ConfigError(f"[region]: {err}") from err

    cert_kwargs: dict[str, object] = {}
    for key, (value, line_no) in sections.get("certify", {}).items():
        if key == "declared_symmetry" and value is not None and not isinstance(value, str):
            raise ConfigError(f"declared_symmetry must be a word or none, got {value!r}", line_no)
        cert_kwargs[key] = value
    try:
        cert = CertifyConfig(**cert_kwargs)  # type: ignore[arg-type]
    except (ValueError, TypeError) as err:
        raise ConfigError(f"[certify]: {err}")

    pent = sections.get("portrait", {})
    portrait = PortraitSettings(
        orbit_count=int(_typed("portrait", pent, "orbit_count", int, 40)),
        orbit_steps=int(_typed("portrait", pent, "orbit_steps", int, 12)),
        width=int(_typed("portrait", pent, "width", int, 640)),
    )
    if portrait.orbit_count < 0 or portrait.orbit_steps < 1 or portrait.width < 100:
        raise ConfigError("[portrait]: orbit_count >= 0, orbit_steps >= 1, width >= 100")

    seed = _typed("run", sections.get("run", {}), "seed", int, DEFAULT_SEED)

    return Config(
        kind=kind,
        dynamics=dynamics,
        region=region,
        certify=cert,
        portrait=portrait,
        seed=int(seed),
    )


def load_config(path) -> Config:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path!r}: {err.strerror or err}")
    return parse_config(text)
