"""Rule-based extraction of prognostic factors from pathology report text.

Each extraction cites the character span it came from. When a factor is
mentioned more than once the most severe finding wins (highest grade,
stage and size; any affirmed invasion), and ``confidence`` is the share
of mentions agreeing with the chosen value.
"""

import configparser
import csv
import re
from dataclasses import dataclass
from importlib import resources

from ..exceptions import BadValue, HeaderMismatch

GRADE_RE = re.compile(r"grade\s*(I{1,3}V?|[1-4]|G[1-4])\b", re.IGNORECASE)
TNM_RE = re.compile(r"pT([0-4])([a-c]?)\s*N([0-3Xx])\s*M([0-1Xx])", re.IGNORECASE)
SIZE_RE = re.compile(
    r"((?:[0-9]+(?:\.[0-9]+)?\s*[x×]\s*)*)([0-9]+(?:\.[0-9]+)?)\s*cm\b", re.IGNORECASE)
TOKEN_RE = re.compile(r"[a-z0-9]+(?:\.[0-9]+)?|[.;!?\n]")
SENTENCE_END = frozenset(".;!?\n")
ROMAN = {"i": 1, "ii": 2, "iii": 3, "iv": 4}
STAGE_LABELS = {1: "Stage I", 2: "Stage II", 3: "Stage III", 4: "Stage IV"}


@dataclass(frozen=True)
class RawReport:
    patient_id: str
    text: str

    def __post_init__(self):
        if not str(self.patient_id).strip():
            raise ValueError("report patient_id must be non-empty")


@dataclass(frozen=True)
class Extraction:
    """One extracted factor value with the text span supporting it."""

    factor: str
    value: float
    label: str
    confidence: float
    span: tuple
    evidence: str

    def to_dict(self):
        return {
            "factor": self.factor,
            "value": self.value,
            "label": self.label,
            "confidence": self.confidence,
            "span": list(self.span),
            "evidence": self.evidence,
        }


def _data_text(name):
    return resources.files(__package__).joinpath("data", name).read_text("utf-8")


def parse_stage_table(text):
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        t, n, m, stage = line.split()
        rows.append((t, n, m, int(stage)))
    return rows


def stage_from_tnm(t, n, m, table):
    """Overall stage for T/N/M digits under a lookup table, or None."""
    for rt, rn, rm, stage in table:
        if all(r == "*" or r == str(v) for r, v in ((rt, t), (rn, n), (rm, m))):
            return stage
    return None


def _phrase_re(phrase):
    words = phrase.lower().split()
    body = r"[\s-]*".join(re.escape(w) for w in words)
    return re.compile(r"\b" + body + r"\b", re.IGNORECASE)


def _tokens(text):
    return [(m.group(0), m.start(), m.end()) for m in TOKEN_RE.finditer(text.lower())]


def _contains(window, cues, start=0):
    """Any cue occurring in ``window`` with its last token at index >= ``start``."""
    words = [w for w, _, _ in window]
    for cue in cues:
        k = len(cue)
        if any(words[i:i + k] == cue for i in range(max(start - k + 1, 0), len(words) - k + 1)):
            return True
    return False


def _starts_within(window, cue, limit):
    words = [w for w, _, _ in window]
    k = len(cue)
    return any(words[i:i + k] == cue for i in range(min(limit, len(words) - k + 1)))


def _severest(found):
    """Pick the largest value; confidence is the share of mentions agreeing."""
    best = max(found, key=lambda f: f[0])
    agree = sum(1 for f in found if f[0] == best[0])
    return best, agree / len(found)


class RuleBasedExtractor:
    """Regex and keyword-window extractor.

    Parameters
    ----------
    rules_text, stage_table_text : str, optional
        Contents of the keyword rules and TNM lookup files; the shipped
        data files by default.

    Any object with an ``extract(text) -> dict[str, Extraction]`` method
    can stand in for this class in :func:`extract_factors`.
    """

    def __init__(self, rules_text=None, stage_table_text=None):
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp.read_string(rules_text if rules_text is not None else _data_text("extraction_rules.ini"))
        neg = cp["negation"]
        self.window = neg.getint("window", 5)
        self.pre_cues = [c.split() for c in _split(neg.get("pre", ""))]
        self.post_cues = [c.split() for c in _split(neg.get("post", ""))]
        self.keywords = {
            s: [_phrase_re(k) for k in _split(cp[s].get("keywords", ""))]
            for s in cp.sections() if s != "negation"
        }
        self.stage_table = parse_stage_table(
            stage_table_text if stage_table_text is not None else _data_text("tnm_stage.txt"))

    def extract(self, text):
        out = {}
        for item in (self._grade(text), self._tnm(text), self._size(text)):
            if item is not None:
                out[item.factor] = item
        for name, patterns in self.keywords.items():
            item = self._binary(text, name, patterns)
            if item is not None:
                out[name] = item
        return out

    def _grade(self, text):
        found = []
        for m in GRADE_RE.finditer(text):
            tok = m.group(1).lower()
            value = int(tok[1]) if tok.startswith("g") else int(tok) if tok.isdigit() else ROMAN.get(tok)
            if value is not None:
                found.append((value, m))
        if not found:
            return None
        (value, m), conf = _severest(found)
        return Extraction("histologic_grade", float(value), f"G{value}", conf, m.span(), m.group(0))

    def _tnm(self, text):
        found = []
        for m in TNM_RE.finditer(text):
            t, n, mm = (0 if g.lower() == "x" else int(g) for g in (m.group(1), m.group(3), m.group(4)))
            stage = stage_from_tnm(t, n, mm, self.stage_table)
            if stage is not None:
                found.append((stage, m))
        if not found:
            return None
        (stage, m), conf = _severest(found)
        return Extraction("TNM_stage", float(stage), STAGE_LABELS[stage], conf, m.span(), m.group(0))

    def _size(self, text):
        found = []
        for m in SIZE_RE.finditer(text):
            dims = [float(x) for x in re.findall(r"[0-9]+(?:\.[0-9]+)?", m.group(0))]
            found.append((max(dims), m))
        if not found:
            return None
        (size, m), conf = _severest(found)
        return Extraction("tumor_size_cm", size, repr(size), conf, m.span(), m.group(0))

    def _binary(self, text, name, patterns):
        tokens = _tokens(text)
        found = []
        for pat in patterns:
            for m in pat.finditer(text):
                found.append((self._polarity(tokens, m.start(), m.end()), m))
        if not found:
            return None
        found.sort(key=lambda f: f[1].start())
        (value, m), conf = _severest(found)
        return Extraction(name, float(value), "yes" if value else "no", conf, m.span(), m.group(0))

    def _polarity(self, tokens, start, end):
        # a pre cue counts when its last token is among the `window` tokens
        # before the keyword; a post cue when its first token is among those after
        first = next(i for i, (_, s, e) in enumerate(tokens) if e > start)
        last = max(i for i, (_, s, _) in enumerate(tokens) if s < end)
        reach = self.window + max((len(c) for c in self.pre_cues + self.post_cues), default=1)
        before = []
        for tok in reversed(tokens[max(first - reach, 0):first]):
            if tok[0] in SENTENCE_END:
                break
            before.insert(0, tok)
        after = []
        for tok in tokens[last + 1:last + 1 + reach]:
            if tok[0] in SENTENCE_END:
                break
            after.append(tok)
        pre = _contains(before, self.pre_cues, start=len(before) - self.window)
        post = any(_starts_within(after, cue, self.window) for cue in self.post_cues)
        return 0 if pre or post else 1


def _split(text):
    return [p.strip() for p in text.split(",") if p.strip()]


_DEFAULT = None


def default_extractor():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = RuleBasedExtractor()
    return _DEFAULT


def extract_factors(report, schema=None, extractor=None):
    """Extract factor values from one report.

    With a schema, only its factors are returned and each label is
    encoded through the schema map (falling back to the natural ordinal
    when the label is not declared). Absent factors are simply missing
    from the result.

    Returns
    -------
    dict of str to Extraction
    """
    text = report.text if isinstance(report, RawReport) else str(report)
    found = (extractor or default_extractor()).extract(text)
    if schema is None:
        return found
    out = {}
    for name in schema.names:
        if name not in found:
            continue
        item = found[name]
        spec = schema[name]
        for raw in (item.label, _code_text(item.value)):
            try:
                code = spec.encode(raw)
            except BadValue:
                continue
            out[name] = Extraction(name, code, item.label, item.confidence, item.span, item.evidence)
            break
    return out


def _code_text(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def load_reports(path):
    """Read ``patient_id,text`` CSV (quoted text allowed) into RawReports."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.reader(fh)
        header = [h.strip() for h in next(rows, [])]
        if header != ["patient_id", "text"]:
            raise HeaderMismatch(
                [c for c in ("patient_id", "text") if c not in header],
                [c for c in header if c not in ("patient_id", "text")])
        return [RawReport(r[0].strip(), r[1]) for r in rows if r]
