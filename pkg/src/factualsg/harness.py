"""Dataset I/O and the batch operations behind the command line.

Every command reads JSONL records and returns a :class:`Report`. Records
that cannot be processed become reject entries, so for each input line
exactly one of (result row, reject) is produced. Per-record work can be
spread over worker processes; results are reassembled in input order and
aggregated in record-id order, so output does not depend on worker count.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from decimal import ROUND_HALF_EVEN, Decimal
from functools import partial
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, Union

from .convert import ConvertOptions, convert, realize_predicate
from .embeddings import EmbeddingStore
from .errors import EmptyInput, FactualError, GoldMissing, MissingField, RecordError
from .lexicons import Lexicons, MorphTable
from .metrics import (
    ScoredPair,
    TiePolicy,
    foil_accuracy,
    kendall_tau_c,
    mtld,
    pearson,
    rank_items,
    safe,
    set_match,
    soft_spice,
    soft_spice_img,
    spice_f1,
    harmonic_combine,
    ttr,
    yules_i,
)
from .mr import AttributeFact, MRGraph, fact_to_text, parse_mr, validate_mr
from .sg import SceneGraph, parse_sg, serialize_sg

PathLike = Union[str, Path]
MODES = ("spice", "softspice", "softspice_img")
CATEGORIES = ("objects", "attributes", "predicates")


@dataclass
class EvalRecord:
    id: str
    caption: str = ""
    mr: Optional[str] = None
    gold_sg: Union[str, list, None] = None
    candidate_sg: Optional[str] = None
    image_id: Optional[str] = None
    human_score: Optional[float] = None
    external_scores: Optional[dict] = None
    foil_sg: Optional[str] = None

    @classmethod
    def from_dict(cls, d: Any) -> "EvalRecord":
        if not isinstance(d, dict):
            raise RecordError("record is not a JSON object")
        if "id" not in d or d["id"] in (None, ""):
            raise MissingField("id")
        known = {f.name for f in fields(cls)}
        rec = cls(**{k: v for k, v in d.items() if k in known})
        rec.id = str(rec.id)
        for name in ("mr", "candidate_sg", "foil_sg", "caption"):
            value = getattr(rec, name)
            if value is not None and not isinstance(value, str):
                raise RecordError(f"field {name!r} must be a string")
        if rec.gold_sg is not None and not isinstance(rec.gold_sg, (str, list)):
            raise RecordError("field 'gold_sg' must be a string or a list of strings")
        if rec.human_score is not None:
            if isinstance(rec.human_score, bool) or not isinstance(rec.human_score, (int, float)):
                raise RecordError("field 'human_score' must be a number")
            rec.human_score = float(rec.human_score)
        if rec.mr is None and rec.gold_sg is None and rec.candidate_sg is None:
            raise MissingField("mr|gold_sg|candidate_sg")
        return rec

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) in (None, ""):
                raise MissingField(name)

    def gold_graph(self) -> SceneGraph:
        """Reference graph; a list of references is merged into one graph."""
        self.require("gold_sg")
        refs = [self.gold_sg] if isinstance(self.gold_sg, str) else self.gold_sg
        graph = SceneGraph()
        for ref in refs:
            if not isinstance(ref, str):
                raise RecordError("gold_sg list entries must be strings")
            graph = graph.union(parse_sg(ref))
        return graph


@dataclass
class Line:
    lineno: int
    data: Any = None
    error: Optional[FactualError] = None


def read_jsonl(path: PathLike) -> list[Line]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                out.append(Line(lineno, json.loads(raw)))
            except json.JSONDecodeError as exc:
                out.append(Line(lineno, error=RecordError(f"invalid JSON: {exc.msg}")))
    return out


def write_jsonl(path: PathLike, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def round6(x: Optional[float]) -> Optional[float]:
    """Round to 6 decimals, half-even on the shortest decimal repr."""
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return x
    return float(Decimal(repr(float(x))).quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


def fmt(x: Any) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{round6(x):.6f}"
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, float):
        return round6(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class Report:
    command: str
    summary: dict
    rows: list[dict] = field(default_factory=list)
    rejects: list[dict] = field(default_factory=list)
    table: list[list[Any]] = field(default_factory=list)
    processed: Optional[int] = None  # defaults to len(rows)

    @property
    def total_failure(self) -> bool:
        done = len(self.rows) if self.processed is None else self.processed
        return bool(self.rejects) and done == 0

    def jsonl_lines(self) -> list[str]:
        rows = [dict(r, kind="record") for r in self.rows]
        rows.append({"kind": "summary", "command": self.command, **self.summary})
        return [json.dumps(_jsonable(r), ensure_ascii=False, sort_keys=True) for r in rows]

    def write(self, path: PathLike) -> None:
        Path(path).write_text("".join(line + "\n" for line in self.jsonl_lines()), encoding="utf-8")

    def write_rejects(self, path: PathLike) -> None:
        write_jsonl(path, self.rejects)

    def render_table(self) -> str:
        rows = self.table or [[k, v] for k, v in self.summary.items()]
        cells = [[fmt(c) for c in row] for row in rows]
        widths = [max(len(r[i]) for r in cells if i < len(r)) for i in range(max(map(len, cells)))]
        lines = []
        for r in cells:
            parts = [c.rjust(widths[i]) if i else c.ljust(widths[i]) for i, c in enumerate(r)]
            lines.append("  ".join(parts).rstrip())
        return "\n".join(lines) + "\n"


def _reject(line: Line, rec_id: Optional[str], exc: FactualError) -> dict:
    return {"id": rec_id, "line": line.lineno, "error": exc.code, "message": str(exc)}


def _run(line: Line, fn: Callable) -> tuple[Optional[str], Any, Optional[dict]]:
    """Apply ``fn`` to one line; returns (id, result, reject)."""
    if line.error is not None:
        return None, None, _reject(line, None, line.error)
    rec_id = line.data.get("id") if isinstance(line.data, dict) else None
    rec_id = None if rec_id is None else str(rec_id)
    try:
        rec = EvalRecord.from_dict(line.data)
        return rec.id, fn(rec), None
    except FactualError as exc:
        return rec_id, None, _reject(line, rec_id, exc)


def map_records(lines: Sequence[Line], fn: Callable, workers: int = 1) -> list[tuple]:
    """Run ``fn`` on every record, in input order, optionally in subprocesses."""
    task = partial(_run, fn=fn)
    if workers <= 1 or len(lines) < 2:
        return [task(line) for line in lines]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, lines, chunksize=max(1, len(lines) // (4 * workers))))


def _check_unique_ids(results: list[tuple], lines: Sequence[Line]) -> list[tuple]:
    seen = set()
    out = []
    for (rec_id, result, reject), line in zip(results, lines):
        if reject is None and rec_id in seen:
            reject = _reject(line, rec_id, RecordError(f"duplicate record id {rec_id!r}"))
            result = None
        if reject is None:
            seen.add(rec_id)
        out.append((rec_id, result, reject))
    return out


def _split(results: list[tuple]) -> tuple[list[tuple[str, Any]], list[dict]]:
    ok = [(rid, res) for rid, res, rej in results if rej is None]
    rejects = [rej for _, _, rej in results if rej is not None]
    return ok, rejects


def _by_id(ok: list[tuple[str, Any]]) -> list[tuple[str, Any]]:
    return sorted(ok, key=lambda p: p[0])


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _unscored(command: str, source: PathLike, lines: Sequence[Line], rejects: list[dict]) -> Report:
    """Report for a run where every record was rejected; an empty input is an error."""
    if not rejects:
        raise EmptyInput(f"{source}: no records")
    return Report(command, {"records": len(lines), "scored": 0, "rejected": len(rejects)}, [], rejects)


def _process(path: PathLike, fn: Callable, workers: int):
    lines = read_jsonl(path)
    results = _check_unique_ids(map_records(lines, fn, workers), lines)
    return lines, results


# --- convert / validate -----------------------------------------------------

def _convert_one(rec: EvalRecord, lexicons: Lexicons, options: ConvertOptions) -> dict:
    rec.require("mr")
    graph = parse_mr(rec.mr, lexicons, rec.caption or None)
    return {"candidate_sg": serialize_sg(convert(graph, options))}


def cmd_convert(
    input_path: PathLike,
    output_path: Optional[PathLike] = None,
    lexicons: Optional[Lexicons] = None,
    options: Optional[ConvertOptions] = None,
    workers: int = 1,
) -> Report:
    lexicons = lexicons or Lexicons.load()
    options = options or ConvertOptions(modifiers=lexicons.modifiers)
    lines, results = _process(input_path, partial(_convert_one, lexicons=lexicons, options=options), workers)
    out_rows = []
    for line, (rec_id, result, reject) in zip(lines, results):
        if reject is None:
            out_rows.append(dict(line.data, **result))
    ok, rejects = _split(results)
    if output_path is not None:
        write_jsonl(output_path, out_rows)
    summary = {"records": len(lines), "converted": len(ok), "rejected": len(rejects)}
    rows = [{"id": rid, **res} for rid, res in _by_id(ok)]
    return Report("convert", summary, rows, rejects)


def _validate_one(rec: EvalRecord, lexicons: Lexicons) -> dict:
    rec.require("mr")
    graph = parse_mr(rec.mr, lexicons)
    return {"diagnostics": [d.to_dict() for d in validate_mr(graph, lexicons)]}


def cmd_validate(input_path: PathLike, lexicons: Optional[Lexicons] = None, workers: int = 1) -> Report:
    lexicons = lexicons or Lexicons.load()
    lines, results = _process(input_path, partial(_validate_one, lexicons=lexicons), workers)
    ok, rejects = _split(results)
    rows = [{"id": rid, **res} for rid, res in _by_id(ok)]
    codes = Counter(d["code"] for r in rows for d in r["diagnostics"])
    summary = {
        "records": len(lines),
        "valid": sum(1 for r in rows if not r["diagnostics"]),
        "with_diagnostics": sum(1 for r in rows if r["diagnostics"]),
        "rejected": len(rejects),
        **{f"diag_{code}": n for code, n in sorted(codes.items())},
    }
    return Report("validate", summary, rows, rejects)


# --- parser evaluation ------------------------------------------------------

def _eval_parser_one(rec: EvalRecord) -> dict:
    rec.require("candidate_sg", "gold_sg")
    cand, gold = parse_sg(rec.candidate_sg), rec.gold_graph()
    prf = spice_f1(cand, gold)
    return {"set_match": set_match(cand, gold), "precision": prf.precision, "recall": prf.recall, "spice_f1": prf.f1}


def cmd_eval_parser(input_path: PathLike, workers: int = 1) -> Report:
    lines, results = _process(input_path, _eval_parser_one, workers)
    ok, rejects = _split(results)
    if not ok:
        return _unscored("eval-parser", input_path, lines, rejects)
    ok = _by_id(ok)
    res = [r for _, r in ok]
    summary = {
        "records": len(lines),
        "scored": len(ok),
        "rejected": len(rejects),
        "set_match_accuracy": _mean([float(r["set_match"]) for r in res]),
        "mean_precision": _mean([r["precision"] for r in res]),
        "mean_recall": _mean([r["recall"] for r in res]),
        "mean_spice_f1": _mean([r["spice_f1"] for r in res]),
    }
    table = [["metric", "value"], ["Set Match", summary["set_match_accuracy"]], ["SPICE P", summary["mean_precision"]],
             ["SPICE R", summary["mean_recall"]], ["SPICE F1", summary["mean_spice_f1"]]]
    return Report("eval-parser", summary, [{"id": rid, **r} for rid, r in ok], rejects, table)


# --- caption evaluation and FOIL --------------------------------------------

def score_graph(
    mode: str,
    candidate: SceneGraph,
    reference: SceneGraph,
    store: Optional[EmbeddingStore],
    image_id: Optional[str] = None,
) -> float:
    if mode == "spice":
        return spice_f1(candidate, reference).f1
    if store is None:
        store = EmbeddingStore.empty()
    if mode == "softspice":
        return soft_spice(candidate, reference, store)
    if mode == "softspice_img":
        if image_id in (None, ""):
            raise MissingField("image_id")
        return soft_spice_img(candidate, reference, image_id, store)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def _combine(rec: EvalRecord, score: float, combine_with: Optional[str]) -> float:
    if not combine_with:
        return score
    ext = (rec.external_scores or {}).get(combine_with)
    if ext is None:
        raise MissingField(f"external_scores.{combine_with}")
    return harmonic_combine(score, float(ext))


def _caption_one(rec: EvalRecord, mode: str, store, combine_with) -> dict:
    rec.require("candidate_sg", "gold_sg", "human_score")
    score = score_graph(mode, parse_sg(rec.candidate_sg), rec.gold_graph(), store, rec.image_id)
    return {"score": _combine(rec, score, combine_with), "human_score": rec.human_score}


def cmd_caption_eval(
    input_path: PathLike,
    mode: str = "spice",
    store: Optional[EmbeddingStore] = None,
    combine_with: Optional[str] = None,
    workers: int = 1,
) -> Report:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    fn = partial(_caption_one, mode=mode, store=store, combine_with=combine_with)
    lines, results = _process(input_path, fn, workers)
    ok, rejects = _split(results)
    if not ok:
        return _unscored("caption-eval", input_path, lines, rejects)
    ok = _by_id(ok)
    scores = [r["score"] for _, r in ok]
    human = [r["human_score"] for _, r in ok]
    tau, tau_err = safe(kendall_tau_c, scores, human)
    rho, rho_err = safe(pearson, scores, human)
    summary = {
        "records": len(lines), "scored": len(ok), "rejected": len(rejects),
        "mode": mode + (f"+{combine_with}" if combine_with else ""),
        "tau_c": tau, "tau_c_error": tau_err, "pearson": rho, "pearson_error": rho_err,
    }
    table = [["metric", "tau_c", "pearson"], [summary["mode"], tau if tau is not None else tau_err,
                                             rho if rho is not None else rho_err]]
    return Report("caption-eval", summary, [{"id": rid, **r} for rid, r in ok], rejects, table)


def _foil_one(rec: EvalRecord, mode: str, store, combine_with) -> dict:
    rec.require("candidate_sg", "foil_sg", "gold_sg")
    gold = rec.gold_graph()
    true_score = score_graph(mode, parse_sg(rec.candidate_sg), gold, store, rec.image_id)
    foil_score = score_graph(mode, parse_sg(rec.foil_sg), gold, store, rec.image_id)
    if combine_with:
        scores = (rec.external_scores or {})
        foil_key = f"{combine_with}_foil"
        if scores.get(combine_with) is None or scores.get(foil_key) is None:
            raise MissingField(f"external_scores.{combine_with} and external_scores.{foil_key}")
        true_score = harmonic_combine(true_score, float(scores[combine_with]))
        foil_score = harmonic_combine(foil_score, float(scores[foil_key]))
    return {"true_score": true_score, "foil_score": foil_score}


def cmd_foil(
    input_path: PathLike,
    mode: str = "spice",
    tie_policy: TiePolicy = TiePolicy.LOSE,
    store: Optional[EmbeddingStore] = None,
    combine_with: Optional[str] = None,
    workers: int = 1,
) -> Report:
    fn = partial(_foil_one, mode=mode, store=store, combine_with=combine_with)
    lines, results = _process(input_path, fn, workers)
    ok, rejects = _split(results)
    if not ok:
        return _unscored("foil", input_path, lines, rejects)
    ok = _by_id(ok)
    pairs = [ScoredPair(r["true_score"], r["foil_score"]) for _, r in ok]
    acc = foil_accuracy(pairs, tie_policy)
    summary = {
        "records": len(lines), "scored": len(ok), "rejected": len(rejects),
        "mode": mode, "tie_policy": TiePolicy(tie_policy).value, "accuracy": acc,
        "ties": sum(1 for p in pairs if p.true_score == p.foil_score),
    }
    return Report("foil", summary, [{"id": rid, **r} for rid, r in ok], rejects)


# --- retrieval --------------------------------------------------------------

def _load_gallery(path: PathLike) -> tuple[list[tuple[str, SceneGraph]], list[dict]]:
    items, rejects, seen = [], [], set()
    for line in read_jsonl(path):
        if line.error is not None:
            rejects.append(_reject(line, None, line.error))
            continue
        d = line.data if isinstance(line.data, dict) else {}
        image_id = d.get("image_id")
        try:
            if image_id in (None, ""):
                raise MissingField("image_id")
            if not isinstance(d.get("gold_sg"), str):
                raise MissingField("gold_sg")
            image_id = str(image_id)
            if image_id in seen:
                raise RecordError(f"duplicate gallery image {image_id!r}")
            graph = parse_sg(d["gold_sg"])
            if len(graph) == 0:
                raise MissingField("gold_sg (empty graph)")
        except FactualError as exc:
            rejects.append(_reject(line, None if image_id is None else str(image_id), exc))
            continue
        seen.add(image_id)
        items.append((image_id, graph))
    return items, rejects


def _retrieve_one(rec: EvalRecord, gallery, store, ks) -> dict:
    rec.require("candidate_sg", "image_id")
    query = parse_sg(rec.candidate_sg)
    gold = str(rec.image_id)
    if gold not in {image_id for image_id, _ in gallery}:
        raise GoldMissing(f"gold image {gold!r} not in gallery")
    scored = [(image_id, soft_spice(query, graph, store)) for image_id, graph in gallery]
    rank = rank_items(scored).index(gold) + 1
    return {"rank": rank, "gold": gold, **{f"r@{k}": rank <= k for k in ks}}


def cmd_retrieve(
    queries_path: PathLike,
    gallery_path: PathLike,
    store: Optional[EmbeddingStore] = None,
    ks: Sequence[int] = (1, 5, 10),
    workers: int = 1,
) -> Report:
    store = store or EmbeddingStore.empty()
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("k values must be positive integers")
    gallery, gallery_rejects = _load_gallery(gallery_path)
    if not gallery:
        raise EmptyInput(f"{gallery_path}: empty gallery")
    fn = partial(_retrieve_one, gallery=gallery, store=store, ks=ks)
    lines, results = _process(queries_path, fn, workers)
    ok, rejects = _split(results)
    if not ok:
        return _unscored("retrieve", queries_path, lines, rejects)
    ok = _by_id(ok)
    recalls = {f"recall@{k}": _mean([float(r[f"r@{k}"]) for _, r in ok]) for k in ks}
    summary = {
        "queries": len(lines), "scored": len(ok), "rejected": len(rejects),
        "gallery": len(gallery), "gallery_rejected": len(gallery_rejects), **recalls,
    }
    for rej in gallery_rejects:
        rej["source"] = "gallery"
    table = [["k", "recall"]] + [[k, recalls[f"recall@{k}"]] for k in ks]
    return Report("retrieve", summary, [{"id": rid, **r} for rid, r in ok], rejects + gallery_rejects, table)


# --- dataset statistics -----------------------------------------------------

STAT_CATEGORIES = ("object", "verb", "preposition", "predicate", "attribute", "quantifier", "fact")


def mr_labels(graph: MRGraph, morphology: Optional[MorphTable] = None) -> dict[str, list[str]]:
    """Label occurrences per category; object suffixes and quantifier modifiers are dropped."""
    out: dict[str, list[str]] = {c: [] for c in STAT_CATEGORIES}
    for fact in graph.facts:
        out["fact"].append(fact_to_text(fact))
        if isinstance(fact, AttributeFact):
            out["object"].append(fact.object.name)
            out["attribute"].append(fact.attribute)
            quants = [fact.quantifier]
        else:
            out["object"] += [fact.subject.name, fact.object.name]
            if fact.verb is not None:
                out["verb"].append(fact.verb.lemma)
            if fact.preposition is not None:
                out["preposition"].append(fact.preposition)
            out["predicate"].append(realize_predicate(fact.verb, fact.preposition, morphology))
            quants = [fact.quantifier_sub, fact.quantifier_obj]
        out["quantifier"] += [str(q.count) for q in quants if q is not None]
    return out


def _stats_one(rec: EvalRecord, lexicons: Lexicons, morphology: Optional[MorphTable]) -> dict:
    rec.require("mr")
    return mr_labels(parse_mr(rec.mr, lexicons), morphology)


def cmd_stats(
    input_path: PathLike,
    lexicons: Optional[Lexicons] = None,
    morphology: Optional[MorphTable] = None,
    workers: int = 1,
) -> Report:
    lexicons = lexicons or Lexicons.load()
    fn = partial(_stats_one, lexicons=lexicons, morphology=morphology)
    lines, results = _process(input_path, fn, workers)
    ok, rejects = _split(results)
    ok = _by_id(ok)
    n = len(ok)
    totals: dict[str, Counter] = defaultdict(Counter)
    per_scene_labels: dict[str, int] = Counter()
    for _, labels in ok:
        for cat in STAT_CATEGORIES:
            totals[cat].update(labels[cat])
            per_scene_labels[cat] += len(set(labels[cat]))
    categories = {}
    for cat in STAT_CATEGORIES:
        distinct, occ = len(totals[cat]), sum(totals[cat].values())
        categories[cat] = {
            "labels": distinct,
            "occurrences": occ,
            "occ_per_label": occ / distinct if distinct else 0.0,
            "labels_per_scene": per_scene_labels[cat] / n if n else 0.0,
            "occ_per_scene": occ / n if n else 0.0,
        }
    summary = {"records": len(lines), "parsed": n, "rejected": len(rejects), "categories": categories}
    table = [["", *STAT_CATEGORIES]]
    for key, title in [("labels", "#Labels"), ("occurrences", "#Occ."), ("occ_per_label", "#Occ. per Class"),
                       ("labels_per_scene", "#Labels per Scene"), ("occ_per_scene", "#Occ. per Scene")]:
        table.append([title, *(categories[c][key] for c in STAT_CATEGORIES)])
    return Report("stats", summary, [], rejects, table, processed=n)


# --- lexical diversity ------------------------------------------------------

def _strip_suffix(name: str) -> str:
    base, sep, suffix = name.rpartition(":")
    return base if sep and suffix.isdigit() and base else name


def category_tokens(graph: SceneGraph, category: str) -> list[str]:
    """Tokens of one category in canonical fact order; object suffixes dropped."""
    out = []
    for f in graph.sorted():
        if category == "objects":
            out.append(_strip_suffix(f.subject))
            if not f.is_attribute:
                out.append(_strip_suffix(f.object))
        elif category == "attributes":
            if f.is_attribute:
                out.append(f.object)
        elif category == "predicates":
            if not f.is_attribute:
                out.append(f.predicate)
        else:
            raise ValueError(f"unknown category {category!r}; expected one of {CATEGORIES}")
    return out


def _diversity_one(rec: EvalRecord, category: str) -> list[str]:
    rec.require("candidate_sg")
    return category_tokens(parse_sg(rec.candidate_sg), category)


def cmd_diversity(
    input_path: PathLike,
    category: str = "objects",
    ttr_scale: float = 1.0,
    threshold: float = 0.72,
    workers: int = 1,
) -> Report:
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    lines, results = _process(input_path, partial(_diversity_one, category=category), workers)
    stream = [tok for _, toks, rej in results if rej is None for tok in toks]
    _, rejects = _split(results)
    if not stream:
        raise EmptyInput(f"{input_path}: no {category} tokens")
    yule, yule_err = safe(yules_i, stream)
    ratio, ttr_err = safe(ttr, stream)
    m, mtld_err = safe(mtld, stream, threshold)
    summary = {
        "records": len(lines), "rejected": len(rejects), "category": category, "tokens": len(stream),
        "types": len(set(stream)), "yules_i": yule, "yules_i_error": yule_err,
        "ttr": None if ratio is None else ratio * ttr_scale, "ttr_error": ttr_err,
        "mtld": m, "mtld_error": mtld_err,
    }
    table = [["category", "Yules I", "TTR", "MTLD"], [category, yule, summary["ttr"], m]]
    return Report("diversity", summary, [], rejects, table, processed=len(lines) - len(rejects))
