"""Command-line interface.

Every command reads its settings from an optional flat ``key = value``
config file (``--config``), then applies flag overrides. Logs go to
stderr; data goes to the named output file, or stdout when none is given.

Exit codes: 0 success, 1 usage or input error, 2 partial success (a
manifest of what was skipped is written next to the output).
"""

import argparse
import configparser
import csv
import hashlib
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import INDEX_FORMAT_VERSION, __version__
from .exceptions import FitFailed, PathCohortError

log = logging.getLogger("pathcohort")

EXIT_OK, EXIT_INPUT, EXIT_PARTIAL = 0, 1, 2

#: Recognized config keys and their value types.
CONFIG_KEYS = {
    "features": str,
    "lineage": str,
    "records": str,
    "schema": str,
    "index": str,
    "out": str,
    "k": int,
    "m_positives": int,
    "max_rounds": int,
    "tol": float,
    "epsilon": float,
    "lambda": str,
    "max_iter": int,
    "cox_tol": float,
    "min_cohort": int,
    "alpha": float,
    "seed": int,
    "normalize_stain": bool,
    "stain_ref": str,
    "factors": str,
    "threads": int,
}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def read_config(path):
    """Parse a flat ``key = value`` file into typed settings."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    with open(path, encoding="utf-8") as fh:
        cp.read_string("[run]\n" + fh.read(), source=str(path))
    out = {}
    for key, raw in cp.items("run"):
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}: unknown config key {key!r}")
        out[key] = _convert(key, raw.strip())
    return out


def _convert(key, raw):
    kind = CONFIG_KEYS[key]
    if kind is bool:
        if raw.lower() in _TRUE:
            return True
        if raw.lower() in _FALSE:
            return False
        raise UsageError(f"config key {key!r} expects a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"config key {key!r} expects {kind.__name__}, got {raw!r}") from None


def settings(args):
    """Config file values overridden by any flag given on the command line."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if not cfg.get(k)]
    if missing:
        raise UsageError("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return [cfg[k] for k in keys]


def _parse_lambda(text):
    if text is None or text == "":
        return 0.0
    if str(text).lower() == "cv":
        return "cv"
    try:
        lam = float(text)
    except ValueError:
        raise UsageError(f"--lambda expects a number or 'cv', got {text!r}") from None
    if lam < 0:
        raise UsageError("--lambda must be non-negative")
    return lam


def _factor_list(text):
    return tuple(s.strip() for s in str(text or "").split(",") if s.strip())


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _emit(text, path):
    """Write ``text`` to ``path``, or to stdout when no path is given."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _rows_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x):
    return repr(float(x))


# records


def _records_schema(path, schema_path):
    from .ingest import continuous_schema, load_schema
    from .ingest.tables import RECORD_COLUMNS

    if schema_path:
        return load_schema(schema_path)
    with open(path, newline="", encoding="utf-8") as fh:
        header = [h.strip() for h in next(csv.reader(fh), [])]
    return continuous_schema([h for h in header if h not in RECORD_COLUMNS])


def _load_records(path, schema_path, factors=()):
    from .ingest import read_records

    schema = _records_schema(path, schema_path)
    loaded = read_records(path, schema)
    for line, pid, missing in loaded.rejects:
        log.warning("records line %d (%s) dropped: missing %s", line, pid, ", ".join(missing))
    ds = loaded.dataset
    if factors:
        unknown = [f for f in factors if f not in ds.names]
        if unknown:
            raise UsageError("unknown factor(s): " + ", ".join(unknown))
        ds = ds.select(factors)
    return ds, loaded


# extract


def _extract_one(job):
    from .features import extract_patch_vector
    from .features.io import load_patch, read_mask

    path, mask_path, wsi, patient, normalizer, config = job
    patch = load_patch(path, wsi, patient)
    if not os.path.exists(mask_path):
        raise FileNotFoundError(f"no mask {os.path.basename(mask_path)}")
    if normalizer is not None:
        patch = normalizer.transform(patch)
    return extract_patch_vector(patch, read_mask(mask_path), config)


def cmd_extract(args):
    from .features import FeatureConfig, MacenkoNormalizer
    from .features.io import find_patch_files, mask_path_for, patch_id_for, read_rgb
    from .ingest import load_lineage, write_features

    cfg = settings(args)
    (out,) = _require(cfg, "out")
    if not os.path.isdir(args.patches):
        raise UsageError(f"patch directory {args.patches!r} does not exist")
    files = find_patch_files(args.patches)
    if not files:
        log.error("no patches found in %s", args.patches)
        return EXIT_INPUT
    lineage = load_lineage(cfg["lineage"]) if cfg.get("lineage") else {}
    normalizer = None
    stain_ref = cfg.get("stain_ref")
    if stain_ref and cfg.get("normalize_stain", True):
        normalizer = MacenkoNormalizer().fit(read_rgb(stain_ref))
    config = FeatureConfig(aggregate=args.aggregate)

    jobs = []
    for path in files:
        pid = patch_id_for(path)
        wsi, patient = lineage.get(pid, (pid, pid))
        jobs.append((path, mask_path_for(path, args.masks), wsi, patient, normalizer, config))

    def run(job):
        try:
            return _extract_one(job), None
        except (PathCohortError, OSError, ValueError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=_threads(cfg)) as pool:
        results = list(pool.map(run, jobs))
    vectors, skipped = [], []
    for (path, *_), (vec, err) in zip(jobs, results):
        if err is None:
            vectors.append(vec)
        else:
            skipped.append((patch_id_for(path), err))
            log.warning("skipped %s: %s", patch_id_for(path), err)
    write_features(out, vectors)
    log.info("wrote %d feature rows to %s", len(vectors), out)
    if skipped:
        manifest = out + ".skipped.csv"
        _emit(_rows_csv(["patch_id", "reason"], skipped), manifest)
        log.warning("%d patch(es) skipped; see %s", len(skipped), manifest)
        return EXIT_PARTIAL
    return EXIT_OK


# index


def _threads(cfg):
    n = cfg.get("threads")
    return max(1, int(n)) if n else (os.cpu_count() or 1)


def _load_index(path, cfg):
    from .index import load_index

    return load_index(path, n_jobs=_threads(cfg))


def _ranked_csv(ranked):
    return _rows_csv(["rank", "patch_id", "distance"],
                     [(r, vid, _num(d)) for r, (vid, d) in enumerate(ranked, 1)])


def cmd_index_build(args):
    from .index import build_index, save_index
    from .ingest import load_features

    cfg = settings(args)
    features, out = _require(cfg, "features", "index")
    vectors = load_features(features, embedding=args.embedding)
    if not vectors:
        raise UsageError(f"{features}: no feature rows")
    index = build_index(vectors, [v.patch_id for v in vectors], n_jobs=_threads(cfg))
    save_index(index, out)
    log.info("indexed %d vectors of dimension %d into %s", index.n, index.dim, out)
    return EXIT_OK


def _query_vector(index, patch_id):
    if patch_id not in index._pos:
        raise UsageError(f"patch id {patch_id!r} is not in the index")
    return index.vector(patch_id, z=False)


def cmd_index_query(args):
    cfg = settings(args)
    (path,) = _require(cfg, "index")
    index = _load_index(path, cfg)
    ranked = index.query(_query_vector(index, args.patch_id), cfg.get("k", 500))
    _emit(_ranked_csv(ranked), args.out)
    return EXIT_OK


def cmd_index_feedback(args):
    from .index import feedback_search

    cfg = settings(args)
    (path,) = _require(cfg, "index")
    index = _load_index(path, cfg)
    ranked, state = feedback_search(
        index, _query_vector(index, args.patch_id), cfg.get("k", 500),
        cfg.get("m_positives", 50), cfg.get("max_rounds", 10), cfg.get("tol", 1e-3),
        cfg.get("epsilon", 1e-6))
    log.info("feedback: %d round(s), converged=%s", state.round, state.converged)
    _emit(_ranked_csv(ranked), args.out)
    return EXIT_OK


# survival


def cmd_survival_km(args):
    from .survival import km_estimate, median_split

    cfg = settings(args)
    (records,) = _require(cfg, "records")
    ds, _ = _load_records(records, cfg.get("schema"))
    if not args.factor:
        _emit(km_estimate(ds).to_csv(), args.out)
        return EXIT_OK
    if args.factor not in ds.names:
        raise UsageError(f"unknown factor {args.factor!r}")
    ds, _ = ds.select([args.factor]).complete_cases()
    low, high, cut = median_split(ds.column(args.factor))
    log.info("%s split at %s", args.factor, cut)
    rows = []
    for group, mask in (("low", low), ("high", high)):
        curve = km_estimate(ds, mask)
        for line in curve.to_csv().splitlines()[1:]:
            rows.append(f"{group},{line}")
    _emit("group,time,survival,at_risk,events,greenwood_var\n" + "\n".join(rows) + "\n", args.out)
    return EXIT_OK


def _read_groups(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["patient_id", "group"]:
        raise UsageError(f"{path}: header must be patient_id,group")
    return {r[0].strip(): r[1].strip() for r in rows[1:] if r}


def cmd_survival_logrank(args):
    import numpy as np

    from .survival import logrank_test, median_split

    cfg = settings(args)
    (records,) = _require(cfg, "records")
    ds, _ = _load_records(records, cfg.get("schema"))
    if bool(args.factor) == bool(args.groups):
        raise UsageError("give exactly one of --factor or --groups")
    if args.factor:
        if args.factor not in ds.names:
            raise UsageError(f"unknown factor {args.factor!r}")
        ds, _ = ds.select([args.factor]).complete_cases()
        low, high, _ = median_split(ds.column(args.factor))
        labels, a, b = ("low", "high"), low, high
    else:
        groups = _read_groups(args.groups)
        labels = tuple(dict.fromkeys(groups.values()))
        if len(labels) != 2:
            raise UsageError(f"--groups must name exactly two groups, found {len(labels)}")
        g = np.array([groups.get(pid) for pid in ds.ids], dtype=object)
        a, b = g == labels[0], g == labels[1]
    res = logrank_test(ds, a, b)
    text = _rows_csv(
        ["group_a", "group_b", "n_a", "n_b", "chi2", "df", "p_value"],
        [(labels[0], labels[1], int(a.sum()), int(b.sum()), _num(res.chi2), 1, _num(res.p_value))])
    _emit(text, args.out)
    return EXIT_OK


def cmd_survival_cox(args):
    from .survival import cox_fit

    cfg = settings(args)
    (records,) = _require(cfg, "records")
    ds, _ = _load_records(records, cfg.get("schema"), _factor_list(cfg.get("factors")))
    ds, dropped = ds.complete_cases()
    if dropped:
        log.warning("%d patient(s) with missing values left out of the fit", len(dropped))
    lam = _parse_lambda(cfg.get("lambda"))
    seed = cfg.get("seed", 0)
    fit = cox_fit(ds, lam, max_iter=cfg.get("max_iter"), tol=cfg.get("cox_tol", 1e-9), seed=seed)
    out = fit.to_dict()
    out["n"] = ds.n
    out["events"] = int(ds.events.sum())
    out["dropped"] = list(dropped)
    if lam == "cv":
        out["cv"] = {"lambda": fit.cv["lambda"], "seed": fit.cv["seed"], "n_folds": fit.cv["n_folds"]}
    out["config"] = {"lambda": str(cfg.get("lambda", 0.0)), "seed": seed}
    _emit(json.dumps(out, indent=2, allow_nan=False) + "\n", args.out)
    return EXIT_OK


def cmd_survival_screen(args):
    from .survival import univariate_screen

    cfg = settings(args)
    (records,) = _require(cfg, "records")
    ds, _ = _load_records(records, cfg.get("schema"), _factor_list(cfg.get("factors")))
    rows = []
    for name in ds.names:
        sub, _ = ds.select([name]).complete_cases()
        rows.extend(univariate_screen(sub, cfg.get("alpha", 0.05)))
    text = _rows_csv(
        ["factor", "logrank_p", "direction", "median_cut", "chi2", "significant"],
        [(r.factor_name, _num(r.logrank_p), r.direction or "", _num(r.median_cut), _num(r.chi2),
          int(r.significant)) for r in rows])
    _emit(text, args.out)
    return EXIT_OK


# ingest


def cmd_ingest_validate(args):
    from .ingest import load_features, load_lineage, validate_bundle

    cfg = settings(args)
    features, lineage, records = _require(cfg, "features", "lineage", "records")
    ds, _ = _load_records(records, cfg.get("schema"))
    report = validate_bundle(load_features(features, embedding=args.embedding), load_lineage(lineage), ds)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    for kind, ident, detail in report.findings:
        log.error("%s %s: %s", kind, ident, detail)
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_ingest_reports(args):
    from .ingest import extract_factors, load_reports, load_schema

    cfg = settings(args)
    schema = load_schema(cfg["schema"]) if cfg.get("schema") else None
    rows = []
    for report in load_reports(args.reports):
        found = extract_factors(report, schema)
        for name in sorted(found):
            e = found[name]
            rows.append((report.patient_id, name, _num(e.value), e.label, _num(e.confidence), e.evidence))
    _emit(_rows_csv(["patient_id", "factor", "value", "label", "confidence", "evidence"], rows), args.out)
    return EXIT_OK


# personalize and simulate


def personalize_config(cfg):
    from .personalize import PersonalizeConfig

    keys = {"k": "k", "m_positives": "m_positives", "max_rounds": "max_rounds", "tol": "tol",
            "epsilon": "epsilon", "max_iter": "cox_max_iter", "cox_tol": "cox_tol",
            "min_cohort": "min_cohort", "alpha": "alpha", "seed": "seed"}
    kwargs = {dst: cfg[src] for src, dst in keys.items() if src in cfg}
    kwargs["lam"] = _parse_lambda(cfg.get("lambda"))
    kwargs["factors"] = _factor_list(cfg.get("factors"))
    try:
        return PersonalizeConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_report(report, out_dir):
    from .personalize import render_report

    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, fmt in (("report.json", "json"), ("report.md", "markdown")):
        path = os.path.join(out_dir, name)
        with open(path, "wb") as fh:
            fh.write(render_report(report, fmt))
        written.append(path)
    for name, curve in (("km_low.csv", report.km_low), ("km_high.csv", report.km_high)):
        if curve is not None:
            _emit(curve.to_csv(), os.path.join(out_dir, name))
            written.append(os.path.join(out_dir, name))
    return written


def cmd_personalize(args):
    from .index import build_index
    from .ingest import lineage_from_features, load_features, load_lineage
    from .personalize import personalize

    cfg = settings(args)
    records_path, out_dir = _require(cfg, "records", "out")
    if not (cfg.get("index") or cfg.get("features")):
        raise UsageError("give --index or --features")
    if cfg.get("index"):
        index = _load_index(cfg["index"], cfg)
    else:
        vectors = load_features(cfg["features"])
        index = build_index(vectors, [v.patch_id for v in vectors], n_jobs=_threads(cfg))
    if cfg.get("lineage"):
        lineage = load_lineage(cfg["lineage"])
    elif cfg.get("features"):
        lineage = lineage_from_features(load_features(cfg["features"]))
    else:
        raise UsageError("give --lineage (or --features, whose id columns carry the lineage)")
    ds, loaded = _load_records(records_path, cfg.get("schema"))
    config = personalize_config(cfg)

    inputs = {k: _sha256_file(cfg[k]) for k in ("features", "lineage", "records", "schema", "index") if cfg.get(k)}
    status = EXIT_OK
    try:
        report = personalize(args.patient_id, index, lineage, ds, config)
    except FitFailed as exc:
        log.error("%s", exc)
        report, status = exc.partial, EXIT_PARTIAL
    report.provenance["inputs"] = inputs
    report.provenance["records_rejected"] = len(loaded.rejects)
    for path in _write_report(report, out_dir):
        log.info("wrote %s", path)
    if loaded.rejects:
        _emit(loaded.rejects_csv(), os.path.join(out_dir, "records_rejects.csv"))
    for w in report.warnings:
        log.warning("%s", w)
    return status


def cmd_simulate(args):
    from .exceptions import SpecInvalid
    from .personalize import simulate_cohort, spec_from_config

    spec_cfg = {}
    if args.spec:
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        with open(args.spec, encoding="utf-8") as fh:
            cp.read_string("[spec]\n" + fh.read(), source=args.spec)
        spec_cfg = {k: v.strip() for k, v in cp.items("spec")}
    if args.seed is not None:
        spec_cfg["seed"] = str(args.seed)
    try:
        spec = spec_from_config(spec_cfg)
    except SpecInvalid as exc:
        raise UsageError(f"invalid simulation spec: {exc}") from None
    for path in simulate_cohort(spec).write(args.out):
        log.info("wrote %s", path)
    return EXIT_OK


# parser


def _add_common(p, *keys):
    p.add_argument("--config", help="flat key = value settings file")
    # also accepted after the subcommand; SUPPRESS keeps the global value otherwise
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    flags = {
        "features": dict(help="features CSV"),
        "lineage": dict(help="lineage CSV (patch_id,wsi_id,patient_id)"),
        "records": dict(help="patient records CSV"),
        "schema": dict(help="factor schema INI (default: every extra column is numeric)"),
        "index": dict(help="PGIX index file"),
        "k": dict(type=int, help="result list length (default 500)"),
        "m_positives": dict(type=int, help="positives added per feedback round (default 50)"),
        "max_rounds": dict(type=int, help="maximum feedback rounds (default 10)"),
        "tol": dict(type=float, help="feedback convergence tolerance (default 1e-3)"),
        "epsilon": dict(type=float, help="weight update floor (default 1e-6)"),
        "lambda": dict(help="L1 penalty: a number or 'cv' (default 0)"),
        "max_iter": dict(type=int, help="Cox iteration cap"),
        "cox_tol": dict(type=float, help="Cox convergence tolerance (default 1e-9)"),
        "min_cohort": dict(type=int, help="minimum cohort size (default 30)"),
        "alpha": dict(type=float, help="screen significance level (default 0.05)"),
        "factors": dict(help="comma-separated factors to model (default: all)"),
    }
    for key in keys:
        kw = dict(flags[key])
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, **kw)


def build_parser():
    parser = _Parser(prog="pathcohort", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"pathcohort {__version__} (index format {INDEX_FORMAT_VERSION})")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    parser.add_argument("--seed", type=int, default=None, help="seed for every random choice")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="patch images and nucleus masks to features.csv")
    _add_common(p, "lineage")
    p.add_argument("--patches", required=True, help="directory of patch images")
    p.add_argument("--masks", required=True, help="directory of <patch>.mask.png files")
    p.add_argument("--stain-ref", dest="stain_ref", default=None, help="reference image for stain normalization")
    p.add_argument("--aggregate", choices=("mean", "median"), default="mean")
    p.add_argument("--out", default=None, required=False, help="features CSV to write")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("index", help="build or query a similarity index")
    isub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = isub.add_parser("build", help="features CSV to a PGIX file")
    _add_common(q, "features", "index")
    q.add_argument("--out", dest="index", help="alias of --index")
    q.add_argument("--embedding", action="store_true", help="accept any value columns")
    q.set_defaults(func=cmd_index_build)
    for name, func, extra in (("query", cmd_index_query, ("k",)),
                              ("feedback", cmd_index_feedback,
                               ("k", "m_positives", "max_rounds", "tol", "epsilon"))):
        q = isub.add_parser(name, help=f"{name} by a stored patch id")
        _add_common(q, "index", *extra)
        q.add_argument("--patch-id", required=True)
        q.add_argument("--out", default=None, help="CSV to write (default stdout)")
        if name == "feedback":
            q.add_argument("--rounds", dest="max_rounds", type=int, default=None, help="alias of --max-rounds")
        q.set_defaults(func=func)

    p = sub.add_parser("survival", help="Kaplan-Meier, log-rank, Cox and factor screen")
    ssub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = ssub.add_parser("km", help="Kaplan-Meier table")
    _add_common(q, "records", "schema")
    q.add_argument("--factor", help="split at this factor's median")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_survival_km)
    q = ssub.add_parser("logrank", help="two-group log-rank test")
    _add_common(q, "records", "schema")
    q.add_argument("--factor", help="median split of this factor")
    q.add_argument("--groups", help="CSV patient_id,group with two group labels")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_survival_logrank)
    q = ssub.add_parser("cox", help="Cox or Lasso-Cox fit")
    _add_common(q, "records", "schema", "factors", "lambda", "max_iter", "cox_tol")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_survival_cox)
    q = ssub.add_parser("screen", help="median-split log-rank screen of every factor")
    _add_common(q, "records", "schema", "factors", "alpha")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_survival_screen)

    p = sub.add_parser("ingest", help="bundle checks and report extraction")
    gsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = gsub.add_parser("validate", help="cross-check features, lineage and records")
    _add_common(q, "features", "lineage", "records", "schema")
    q.add_argument("--embedding", action="store_true")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_ingest_validate)
    q = gsub.add_parser("reports", help="extract factors from free-text reports")
    _add_common(q, "schema")
    q.add_argument("--reports", required=True, help="CSV patient_id,text")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_ingest_reports)

    p = sub.add_parser("personalize", help="personalized factor weights for one patient")
    _add_common(p, "features", "lineage", "records", "schema", "index", "k", "m_positives",
                "max_rounds", "tol", "epsilon", "lambda", "max_iter", "cox_tol", "min_cohort",
                "alpha", "factors")
    p.add_argument("--patient-id", required=True)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_personalize)

    p = sub.add_parser("simulate", help="write a synthetic cohort bundle")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    p.add_argument("--spec", help="flat key = value simulation spec")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s", force=True)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            log.setLevel(logging.DEBUG)
        return args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except (ValueError, OSError, KeyError, configparser.Error) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and not isinstance(exc, PathCohortError) and exc.args else exc
        log.error("%s", msg)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
