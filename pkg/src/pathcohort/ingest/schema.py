"""Prognostic-factor schemas: which record columns to read and how to encode them.

A schema file is INI text with one section per factor::

    [histologic_grade]
    kind = ordinal
    required = false
    map = G1:1, G2:2, G3:3, G4:4

``kind`` is ``ordinal``, ``binary`` or ``continuous``. ``map`` lists
``label:code`` pairs (labels compared case-insensitively); binary factors
default to ``yes:1, no:0``. Continuous factors take no map. An optional
``missing`` key lists extra labels read as missing, e.g. ``GX``.
"""

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources

from ..exceptions import BadValue

KINDS = ("ordinal", "binary", "continuous")
MISSING_TOKENS = frozenset({"", "na", "nan", "n/a", "null", "none", "unknown", "[not available]"})
DEFAULT_BINARY_MAP = {"yes": 1.0, "no": 0.0}


@dataclass(frozen=True)
class FactorSpec:
    name: str
    kind: str = "continuous"
    required: bool = False
    encoding: dict = field(default_factory=dict)
    missing: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"factor {self.name!r}: kind must be one of {KINDS}, got {self.kind!r}")
        enc = {str(k).strip(): float(v) for k, v in dict(self.encoding).items()}
        if self.kind == "binary" and not enc:
            enc = dict(DEFAULT_BINARY_MAP)
        if self.kind == "continuous" and enc:
            raise ValueError(f"factor {self.name!r}: continuous factors take no map")
        if self.kind != "continuous" and not enc:
            raise ValueError(f"factor {self.name!r}: {self.kind} factors need a map")
        if len(set(enc.values())) != len(enc):
            raise ValueError(f"factor {self.name!r}: encoding is not injective")
        if self.kind == "binary" and set(enc.values()) != {0.0, 1.0}:
            raise ValueError(f"factor {self.name!r}: binary codes must be 0 and 1")
        lookup = {k.lower(): v for k, v in enc.items()}
        if len(lookup) != len(enc):
            raise ValueError(f"factor {self.name!r}: labels differ only by case")
        object.__setattr__(self, "encoding", enc)
        object.__setattr__(self, "_lookup", lookup)
        object.__setattr__(self, "missing", frozenset(m.strip().lower() for m in self.missing))

    def encode(self, raw, row=None):
        """Code for a raw cell; NaN when the cell is a missing token."""
        text = str(raw).strip()
        key = text.lower()
        if key in MISSING_TOKENS or key in self.missing:
            return math.nan
        if self.kind == "continuous":
            try:
                value = float(text)
            except ValueError:
                raise BadValue(row, self.name, raw, "not a number") from None
            if not math.isfinite(value):
                raise BadValue(row, self.name, raw, "not finite")
            return value
        if key in self._lookup:
            return self._lookup[key]
        # numeric cells are accepted when they are one of the declared codes
        try:
            value = float(text)
        except ValueError:
            value = math.nan
        if value in self.encoding.values():
            return value
        raise BadValue(row, self.name, raw, f"not one of {sorted(self.encoding)}")

    def decode(self, code):
        """Label for a code; missing codes decode to the empty string."""
        if code is None or (isinstance(code, float) and math.isnan(code)):
            return ""
        if self.kind == "continuous":
            return repr(float(code))
        for label, c in self.encoding.items():
            if c == code:
                return label
        raise KeyError(f"factor {self.name!r} has no label for code {code!r}")


@dataclass(frozen=True)
class FactorSchema:
    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        names = [f.name for f in factors]
        if len(set(names)) != len(names):
            raise ValueError("factor names must be unique")
        object.__setattr__(self, "factors", factors)

    @property
    def names(self):
        return tuple(f.name for f in self.factors)

    def __getitem__(self, name):
        for f in self.factors:
            if f.name == name:
                return f
        raise KeyError(name)

    def __contains__(self, name):
        return name in self.names

    def __len__(self):
        return len(self.factors)

    def subset(self, names):
        return FactorSchema(tuple(self[n] for n in names))

    def to_ini(self):
        lines = []
        for f in self.factors:
            lines += [f"[{f.name}]", f"kind = {f.kind}", f"required = {str(f.required).lower()}"]
            if f.kind != "continuous":
                pairs = ", ".join(f"{k}:{_code_text(v)}" for k, v in f.encoding.items())
                lines.append(f"map = {pairs}")
            if f.missing:
                lines.append("missing = " + ", ".join(sorted(f.missing)))
            lines.append("")
        return "\n".join(lines)


def _code_text(v):
    return str(int(v)) if float(v).is_integer() else repr(v)


def _parse_map(text, section):
    enc = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        label, sep, code = item.rpartition(":")
        if not sep or not label.strip():
            raise ValueError(f"[{section}] map entry {item!r} is not label:code")
        enc[label.strip()] = float(code)
    return enc


def parse_schema(text):
    """Parse schema INI text into a :class:`FactorSchema`."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    cp.read_string(text)
    factors = []
    for section in cp.sections():
        sec = cp[section]
        unknown = set(sec) - {"kind", "required", "map", "missing"}
        if unknown:
            raise ValueError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")
        factors.append(FactorSpec(
            name=section,
            kind=sec.get("kind", "continuous").strip(),
            required=sec.getboolean("required", fallback=False),
            encoding=_parse_map(sec.get("map", ""), section),
            missing=frozenset(m for m in sec.get("missing", "").split(",") if m.strip()),
        ))
    return FactorSchema(tuple(factors))


def load_schema(path=None):
    """Read a schema file; with no path, the shipped default schema."""
    if path is None:
        text = resources.files(__package__).joinpath("data", "default_schema.ini").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_schema(text)


def continuous_schema(names, required=False):
    """Schema reading every named column as a plain number."""
    return FactorSchema(tuple(FactorSpec(n, "continuous", required) for n in names))
