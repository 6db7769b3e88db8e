"""Command line: ``lvq extract``, ``lvq study``, ``lvq convert`` and ``lvq fixture``.

Exit codes: 0 success, 2 partial success (some features absent), 1 fatal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .catalog import ASPECTS, FEATURE_KEYS, FEATURES, KNOWLEDGE_GAIN
from .errors import LVQError, ValidationError
from .ingest import (
    dump_canonical_json, merge_layouts, parse_layout_xhtml, parse_layout_xml,
    parse_study_csvs,
)
from .pipeline import PipelineConfig, atomic_write, extract_video
from .text_semantics import ENV_LEXICON

log = logging.getLogger("lvq")

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

PAPER_MIN_VIDEOS = 5
PAPER_MIN_RATERS = 5
HARD_MIN_VIDEOS = 3
HARD_MIN_RATERS = 2
SCATTER_MAX_ALPHA = 0.1


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# extract

def _extract_one(args):
    directory, config = args
    try:
        result = extract_video(directory, config)
    except (LVQError, ValueError, OSError) as exc:
        return directory, None, f"{type(exc).__name__}: {exc}"
    return directory, result, None


def features_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["video_id", *FEATURE_KEYS])
    for r in sorted(results, key=lambda r: r.video_id):
        w.writerow([r.video_id, *("" if r.features[k] is None else repr(r.features[k])
                                  for k in FEATURE_KEYS)])
    return buf.getvalue()


def cmd_extract(ns) -> int:
    config = PipelineConfig.load(ns.config)
    dirs = [str(Path(d)) for d in ns.video_dir]
    if ns.output and len(dirs) > 1:
        raise ValidationError("-o takes a single video directory; use --out-dir for several")
    jobs = max(1, ns.jobs)
    work = [(d, config) for d in dirs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            outcomes = list(pool.map(_extract_one, work))
    else:
        outcomes = [_extract_one(w) for w in work]

    code = EXIT_OK
    done = []
    for directory, result, error in outcomes:
        if error:
            log.error("%s: %s", directory, error)
            code = EXIT_FATAL
            continue
        done.append(result)
        text = dumps(result.to_json_doc(config))
        if ns.output:
            atomic_write(ns.output, text)
        elif ns.out_dir:
            atomic_write(Path(ns.out_dir) / f"{result.video_id}.json", text)
        else:
            sys.stdout.write(text)
        for w in result.diagnostics["warnings"]:
            log.warning("%s: %s", result.video_id, w)
        if result.partial:
            log.warning("%s: absent features: %s", result.video_id,
                        ", ".join(f"{k} ({v})" for k, v in result.absent.items()))
            if code == EXIT_OK:
                code = EXIT_PARTIAL
    if ns.csv and done:
        atomic_write(ns.csv, features_csv(done))
    return code


# ---------------------------------------------------------------------------
# study

def read_features_csv(text: str) -> dict:
    """video -> feature -> float or None; columns must be known feature keys."""
    reader = csv.DictReader(io.StringIO(text.lstrip("﻿")))
    header = [h.strip() for h in reader.fieldnames or []]
    if not header or header[0] != "video_id":
        raise ValidationError("features CSV: first column must be video_id (line 1)")
    unknown = [h for h in header[1:] if h not in FEATURE_KEYS]
    if unknown:
        raise ValidationError(f"features CSV: unknown feature columns {unknown} (line 1)")
    reader.fieldnames = header
    out = {}
    for row in reader:
        line = reader.line_num
        video = (row.get("video_id") or "").strip()
        if not video:
            raise ValidationError(f"features CSV line {line}: empty video_id")
        if video in out:
            raise ValidationError(f"features CSV line {line}: duplicate video {video!r}")
        values = {}
        for key in header[1:]:
            raw = (row.get(key) or "").strip()
            try:
                values[key] = float(raw) if raw else None
            except ValueError:
                raise ValidationError(
                    f"features CSV line {line}: {key} = {raw!r} is not a number") from None
        out[video] = values
    return out


def correlation_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature", "aspect", "method", "r", "n", "alpha_bucket"])
    for r in rows:
        w.writerow([r.feature, r.aspect, r.method, "" if r.r is None else repr(r.r), r.n, r.bucket])
    return buf.getvalue()


def kg_csv(gains) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["video_id", "n", "mu", "sigma", "printed_mu", "kg", "status"])
    for video, g in sorted(gains.items()):
        if isinstance(g, str):
            w.writerow([video, "", "", "", "", "", g])
            continue
        status = "DegenerateVariance" if g.degenerate else "ok"
        w.writerow([video, g.n, repr(g.mu), repr(g.sigma), repr(g.printed_mu),
                    "" if g.kg is None else repr(g.kg), status])
    return buf.getvalue()


def cmd_study(ns) -> int:
    from . import plots
    from .study_stats import aspect_means, correlation_table, knowledge_gain, quiz_scores

    def read(path):
        try:
            return Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise LVQError(f"cannot read {path}: {exc}") from None

    features = read_features_csv(read(ns.features))
    records = parse_study_csvs(read(ns.ratings), read(ns.quiz))
    if not any(r.ratings for r in records):
        raise ValidationError(f"{ns.ratings}: no ratings")

    raters: dict = {}
    for rec in records:
        if rec.ratings:
            raters.setdefault(rec.video_id, set()).add(rec.participant_id)
    videos = sorted(set(features) & set(raters))
    fewest = min((len(raters[v]) for v in videos), default=0)
    if len(videos) < HARD_MIN_VIDEOS or fewest < HARD_MIN_RATERS:
        raise ValidationError(
            f"need at least {HARD_MIN_VIDEOS} videos with {HARD_MIN_RATERS} raters each; "
            f"got {len(videos)} videos, fewest raters {fewest}")
    if len(videos) < PAPER_MIN_VIDEOS or fewest < PAPER_MIN_RATERS:
        log.warning("only %d videos / at least %d raters each; results are fragile",
                    len(videos), fewest)
    for v in sorted(set(features) ^ set(raters)):
        log.warning("video %s is missing from %s", v,
                    "ratings" if v in features else "features")

    means = aspect_means(r for r in records if r.video_id in videos)
    scores = quiz_scores(r for r in records if r.video_id in videos)
    quizzed = {s.video_id for s in scores}
    gains: dict = {}
    kg: dict = {}
    for v in videos:
        if v not in quizzed:
            gains[v] = "NoQuiz"
            continue
        try:
            g = knowledge_gain(scores, v)
        except LVQError as exc:
            gains[v] = type(exc).__name__
            continue
        gains[v] = g
        kg[v] = g.kg
    rows = correlation_table({v: features[v] for v in videos}, means, kg,
                             feature_keys=FEATURE_KEYS)

    out = Path(ns.output)
    atomic_write(out / "correlations.csv", correlation_csv(rows))
    atomic_write(out / "correlations.json", dumps({
        "videos": videos,
        "rows": [{"feature": r.feature, "aspect": r.aspect, "method": r.method, "r": r.r,
                  "n": r.n, "df": r.df, "alpha_bucket": r.bucket, "error": r.error}
                 for r in rows],
    }))
    atomic_write(out / "knowledge_gain.csv", kg_csv(gains))
    atomic_write(out / "knowledge_gain.svg", plots.kg_histogram(kg.get(v) for v in videos))

    labels = dict(FEATURES) | dict(ASPECTS) | {KNOWLEDGE_GAIN: "Knowledge gain"}
    for r in rows:
        if r.alpha is None or r.alpha > SCATTER_MAX_ALPHA:
            continue
        pairs = []
        for v in videos:
            x = features[v].get(r.feature)
            y = kg.get(v) if r.aspect == KNOWLEDGE_GAIN else means.get(v, {}).get(r.aspect)
            if x is not None and y is not None:
                pairs.append((x, y))
        svg = plots.scatter([p[0] for p in pairs], [p[1] for p in pairs],
                            labels[r.feature], labels[r.aspect],
                            f"{r.method} r = {r.r:.3f}, alpha < {r.alpha:g}")
        atomic_write(out / "scatter" / f"{r.feature}__{r.aspect}.svg", svg)
    undefined = sum(1 for r in rows if r.error)
    if undefined:
        log.warning("%d of %d correlations undefined", undefined, len(rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# convert

def cmd_convert(ns) -> int:
    try:
        xhtml = Path(ns.xhtml).read_text(encoding="utf-8")
        text_slides = parse_layout_xhtml(xhtml)
        if ns.xml:
            layouts = merge_layouts(text_slides,
                                    parse_layout_xml(Path(ns.xml).read_text(encoding="utf-8")))
        else:
            log.warning("no --xml given; slides have no image boxes")
            layouts = text_slides
    except OSError as exc:
        raise LVQError(f"cannot read input: {exc}") from None
    text = dump_canonical_json(layouts)
    if ns.output:
        atomic_write(ns.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_fixture(ns) -> int:
    from .synthetic import write_extract_fixture, write_study_fixture
    if ns.kind == "extract":
        write_extract_fixture(ns.directory)
    else:
        write_study_fixture(ns.directory)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lvq", description="Lecture-video quality features.",
        epilog=f"${ENV_LEXICON} overrides the bundled lexicon. "
               "Exit codes: 0 ok, 2 some features absent, 1 fatal.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("extract", help="compute the 22 features of video directories")
    e.add_argument("video_dir", nargs="+")
    e.add_argument("--config", help="key = value file of pipeline settings")
    e.add_argument("-o", "--output", help="JSON output for a single video (default stdout)")
    e.add_argument("--out-dir", help="write <video_id>.json per video here")
    e.add_argument("--csv", help="also write a features CSV (input of `lvq study`)")
    e.add_argument("--jobs", type=int, default=1, help="videos processed in parallel")
    e.set_defaults(func=cmd_extract)

    s = sub.add_parser("study", help="correlate features with ratings and knowledge gain")
    s.add_argument("--features", required=True)
    s.add_argument("--ratings", required=True)
    s.add_argument("--quiz", required=True)
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.set_defaults(func=cmd_study)

    c = sub.add_parser("convert", help="turn pdftotext/pdftohtml output into layout.json")
    c.add_argument("--xhtml", required=True)
    c.add_argument("--xml")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_convert)

    f = sub.add_parser("fixture", help="write a bundled synthetic fixture")
    f.add_argument("kind", choices=("extract", "study"))
    f.add_argument("directory")
    f.set_defaults(func=cmd_fixture)
    return p


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if ns.quiet else logging.WARNING,
                        format="lvq: %(levelname)s: %(message)s")
    try:
        return ns.func(ns)
    except (LVQError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())

