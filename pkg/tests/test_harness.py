import json

import pytest

from factualsg import cli, harness
from factualsg.embeddings import EmbeddingStore
from factualsg.errors import EmptyInput
from factualsg.metrics import TiePolicy

from conftest import DATA


def jsonl(path, rows):
    path.write_text("".join((r if isinstance(r, str) else json.dumps(r)) + "\n" for r in rows), encoding="utf-8")
    return path


def read(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


# ---- convert ---------------------------------------------------------------

def test_convert_fills_candidate(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", [{"id": "r1", "caption": "cup filled with water", "mr": "(cup, p:fill, with, water)"}])
    out = tmp_path / "out.jsonl"
    report = harness.cmd_convert(src, out)
    assert read(out)[0]["candidate_sg"] == "(cup, filled with, water)"
    assert report.summary == {"records": 1, "converted": 1, "rejected": 0}


def test_convert_missing_mr_rejected(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", [{"id": "r1", "gold_sg": "(a, on, b)"}])
    report = harness.cmd_convert(src, tmp_path / "out.jsonl")
    assert [(r["id"], r["error"], r["message"]) for r in report.rejects] == [("r1", "MissingField", "mr")]
    assert report.total_failure


def test_convert_partial_failure_cli(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", [
        {"id": "a", "mr": "(man, on, horse)"},
        {"id": "b", "mr": "(man, on, horse"},
        {"id": "c", "mr": "(3, men, read, 3, books)"},
    ])
    out, rej = tmp_path / "out.jsonl", tmp_path / "rej.jsonl"
    code = cli.main(["convert", str(src), "-o", str(out), "--rejects", str(rej)])
    assert code == 0
    assert [r["id"] for r in read(out)] == ["a", "c"]
    assert [(r["id"], r["error"]) for r in read(rej)] == [("b", "TextSyntaxError")]


def test_convert_total_failure_exit_code(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", ["{not json", {"id": "x", "mr": "(2z, a, on, b)"}])
    rej = tmp_path / "rej.jsonl"
    assert cli.main(["convert", str(src), "-o", str(tmp_path / "o.jsonl"), "--rejects", str(rej)]) == 2
    assert [r["error"] for r in read(rej)] == ["RecordError", "UnknownModifier"]


def test_duplicate_ids_rejected(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", [{"id": "a", "mr": "(man, on, horse)"}, {"id": "a", "mr": "(dog, on, bed)"}])
    report = harness.cmd_convert(src, tmp_path / "o.jsonl")
    assert report.summary["converted"] == 1 and report.rejects[0]["line"] == 2


def test_usage_error_exit_code(capsys):
    assert pytest.raises(SystemExit, cli.main, ["no-such-command"]).value.code == 1
    assert pytest.raises(SystemExit, cli.main, ["stats"]).value.code == 1


def test_missing_input_file_exit_code(tmp_path):
    assert cli.main(["stats", str(tmp_path / "missing.jsonl")]) == 2


def test_validate(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", [{"id": "a", "mr": "(cat, sit, betwixt, chair)"},
                                        {"id": "b", "mr": "(cup, p:fill, with, water)"}])
    report = harness.cmd_validate(src)
    assert report.rows[0]["diagnostics"][0]["code"] == "UnknownPreposition"
    assert report.summary["valid"] == 1


# ---- eval-parser -----------------------------------------------------------

def test_eval_parser_identical(tmp_path):
    rows = [{"id": str(i), "candidate_sg": g, "gold_sg": g} for i, g in enumerate(
        ["(a, on, b)", "(man, ride, horse), (horse, has_attribute, brown)", ""])]
    report = harness.cmd_eval_parser(jsonl(tmp_path / "in.jsonl", rows))
    assert report.summary["set_match_accuracy"] == 1.0 and report.summary["mean_spice_f1"] == 1.0


def test_eval_parser_fixture_pair(tmp_path):
    rows = [{"id": "1", "candidate_sg": "(man, ride, horse)",
             "gold_sg": "(man, ride, horse), (horse, has_attribute, brown)"}]
    report = harness.cmd_eval_parser(jsonl(tmp_path / "in.jsonl", rows))
    assert report.summary["mean_spice_f1"] == pytest.approx(6 / 7, abs=1e-12)
    assert report.summary["set_match_accuracy"] == 0.0


def test_eval_parser_empty_input(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    with pytest.raises(EmptyInput):
        harness.cmd_eval_parser(path)
    assert cli.main(["eval-parser", str(path)]) == 2


def test_eval_parser_report_and_table(tmp_path, capsys):
    rows = [{"id": "1", "candidate_sg": "(man, ride, horse)",
             "gold_sg": "(man, ride, horse), (horse, has_attribute, brown)"}]
    src, rep = jsonl(tmp_path / "in.jsonl", rows), tmp_path / "rep.jsonl"
    assert cli.main(["eval-parser", str(src), "--report", str(rep)]) == 0
    summary = read(rep)[-1]
    assert summary["kind"] == "summary" and summary["mean_spice_f1"] == 0.857143
    assert "SPICE F1   0.857143" in capsys.readouterr().out


def test_multiple_references_are_merged(tmp_path):
    rows = [{"id": "1", "candidate_sg": "(man, ride, horse), (horse, has_attribute, brown)",
             "gold_sg": ["(man, ride, horse)", "(horse, has_attribute, brown)"]}]
    report = harness.cmd_eval_parser(jsonl(tmp_path / "in.jsonl", rows))
    assert report.summary["set_match_accuracy"] == 1.0


# ---- caption-eval ----------------------------------------------------------

GOLD = "(man, ride, horse), (horse, has_attribute, brown)"


def test_caption_eval_perfect_agreement(tmp_path):
    rows = [
        {"id": "1", "candidate_sg": GOLD, "gold_sg": GOLD, "human_score": 1.0},
        {"id": "2", "candidate_sg": "(dog, on, bed)", "gold_sg": GOLD, "human_score": 0.0},
        {"id": "3", "candidate_sg": "(man, ride, horse)", "gold_sg": GOLD, "human_score": 6 / 7},
    ]
    report = harness.cmd_caption_eval(jsonl(tmp_path / "in.jsonl", rows), "spice")
    assert report.summary["tau_c"] == pytest.approx(1.0) and report.summary["pearson"] == pytest.approx(1.0)


def test_caption_eval_constant_metric(tmp_path):
    rows = [{"id": str(i), "candidate_sg": GOLD, "gold_sg": GOLD, "human_score": i} for i in range(3)]
    s = harness.cmd_caption_eval(jsonl(tmp_path / "in.jsonl", rows), "spice").summary
    assert (s["tau_c"], s["tau_c_error"]) == (None, "DegenerateM")
    assert (s["pearson"], s["pearson_error"]) == (None, "ZeroVariance")


def test_caption_eval_tau_c_fixture(tmp_path):
    rows = [
        {"id": "1", "candidate_sg": "(dog, on, bed)", "gold_sg": GOLD, "human_score": 1},
        {"id": "2", "candidate_sg": "(cat, on, mat)", "gold_sg": GOLD, "human_score": 2},
        {"id": "3", "candidate_sg": GOLD, "gold_sg": GOLD, "human_score": 3},
    ]
    s = harness.cmd_caption_eval(jsonl(tmp_path / "in.jsonl", rows), "spice").summary
    assert s["tau_c"] == pytest.approx(8 / 9, abs=1e-12)


def test_caption_eval_soft_modes(tmp_path):
    rows = [
        {"id": "1", "candidate_sg": "(man, ride, pony)", "gold_sg": "(man, ride, horse)", "human_score": 2,
         "image_id": "img1", "external_scores": {"bertscore": 0.5}},
        {"id": "2", "candidate_sg": "(man, ride, horse)", "gold_sg": "(man, ride, horse)", "human_score": 3,
         "image_id": "img1", "external_scores": {"bertscore": 0.9}},
    ]
    src = jsonl(tmp_path / "in.jsonl", rows)
    from factualsg.embeddings import load_store
    store = load_store(DATA / "store.tsv", DATA / "images.tsv", fallback=False)
    soft = harness.cmd_caption_eval(src, "softspice", store)
    assert soft.rows[0]["score"] == pytest.approx(2.5 / 3, abs=1e-6)
    img = harness.cmd_caption_eval(src, "softspice_img", store)
    assert img.rows[1]["score"] == pytest.approx(2 * (1 / 3) / (4 / 3))
    combined = harness.cmd_caption_eval(src, "softspice", store, combine_with="bertscore")
    assert combined.rows[1]["score"] == pytest.approx(2 * 0.9 / 1.9)


def test_caption_eval_missing_human_score(tmp_path):
    rows = [{"id": "1", "candidate_sg": GOLD, "gold_sg": GOLD},
            {"id": "2", "candidate_sg": GOLD, "gold_sg": GOLD, "human_score": 1}]
    report = harness.cmd_caption_eval(jsonl(tmp_path / "in.jsonl", rows), "spice")
    assert report.rejects[0]["error"] == "MissingField"


# ---- foil ------------------------------------------------------------------

def foil_rows(pairs):
    return [{"id": str(i), "candidate_sg": t, "foil_sg": f, "gold_sg": GOLD} for i, (t, f) in enumerate(pairs)]


def test_foil_all_correct(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", foil_rows([(GOLD, "(dog, on, bed)"), ("(man, ride, horse)", "(man, ride, cow)")]))
    assert harness.cmd_foil(src).summary["accuracy"] == 1.0


def test_foil_constant_metric(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", foil_rows([("(dog, on, bed)", "(cat, on, mat)")] * 3))
    assert harness.cmd_foil(src, tie_policy=TiePolicy.LOSE).summary["accuracy"] == 0.0
    assert harness.cmd_foil(src, tie_policy=TiePolicy.HALF).summary["accuracy"] == 0.5


def test_foil_mixed_half(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", foil_rows([("(dog, on, bed)", "(cat, on, mat)"), (GOLD, "(dog, on, bed)")]))
    assert cli.main(["foil", str(src), "--tie-policy", "half", "--report", str(tmp_path / "r.jsonl")]) == 0
    assert read(tmp_path / "r.jsonl")[-1]["accuracy"] == 0.75


# ---- retrieve --------------------------------------------------------------

def test_retrieve_exact_queries(tmp_path):
    graphs = {"i1": "(man, ride, horse)", "i2": "(dog, on, bed)", "i3": "(cup, filled with, water)"}
    gallery = jsonl(tmp_path / "g.jsonl", [{"id": k, "image_id": k, "gold_sg": v} for k, v in graphs.items()])
    queries = jsonl(tmp_path / "q.jsonl", [{"id": f"q{k}", "candidate_sg": v, "image_id": k} for k, v in graphs.items()])
    report = harness.cmd_retrieve(queries, gallery, EmbeddingStore.empty(), ks=[1, 2, 10])
    assert report.summary["recall@1"] == 1.0 and report.summary["recall@10"] == 1.0


def test_retrieve_toy_gallery_ranking(tmp_path, fixture_store):
    # scores vs query (man, ride, pony): img_a = img_c = 0.8333, img_b = 0.7453 -> a, c, b
    gallery = jsonl(tmp_path / "g.jsonl", [
        {"id": "a", "image_id": "img_a", "gold_sg": "(man, ride, horse)"},
        {"id": "b", "image_id": "img_b", "gold_sg": "(man, has_attribute, tall)"},
        {"id": "c", "image_id": "img_c", "gold_sg": "(man, ride, horse)"},
    ])
    queries = jsonl(tmp_path / "q.jsonl", [
        {"id": "q1", "candidate_sg": "(man, ride, pony)", "image_id": "img_c"},
        {"id": "q2", "candidate_sg": "(man, ride, pony)", "image_id": "img_b"},
    ])
    report = harness.cmd_retrieve(queries, gallery, fixture_store, ks=[1, 2, 3])
    assert [r["rank"] for r in report.rows] == [2, 3]
    assert report.summary["recall@1"] == 0.0
    assert report.summary["recall@2"] == 0.5
    assert report.summary["recall@3"] == 1.0


def test_retrieve_gold_missing(tmp_path):
    gallery = jsonl(tmp_path / "g.jsonl", [{"image_id": "i1", "gold_sg": "(a, on, b)"}])
    queries = jsonl(tmp_path / "q.jsonl", [{"id": "q", "candidate_sg": "(a, on, b)", "image_id": "i9"},
                                           {"id": "r", "candidate_sg": "(a, on, b)", "image_id": "i1"}])
    report = harness.cmd_retrieve(queries, gallery, EmbeddingStore.empty(), ks=[1])
    assert report.rejects[0]["error"] == "GoldMissing"


def test_retrieve_cli_missing_key(tmp_path):
    gallery = jsonl(tmp_path / "g.jsonl", [{"image_id": "i1", "gold_sg": "(zebra, on, grass)"}])
    queries = jsonl(tmp_path / "q.jsonl", [{"id": "q", "candidate_sg": "(man, ride, horse)", "image_id": "i1"}])
    code = cli.main(["retrieve", str(queries), str(gallery), "--embeddings", str(DATA / "store.tsv"),
                     "--fallback-embedder", "off", "--k", "1,5", "--rejects", str(tmp_path / "rej.jsonl")])
    assert code == 2
    assert read(tmp_path / "rej.jsonl")[0]["error"] == "MissingKey"


# ---- stats -----------------------------------------------------------------

def test_stats_single_record(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", [{"id": "1", "mr": "(men, watch, men:1)"}])
    cats = harness.cmd_stats(src).summary["categories"]
    assert (cats["object"]["labels"], cats["object"]["occurrences"]) == (1, 2)
    assert (cats["verb"]["labels"], cats["verb"]["occurrences"]) == (1, 1)
    assert (cats["fact"]["labels"], cats["fact"]["occurrences"]) == (1, 1)
    assert cats["preposition"]["labels"] == 0


def test_stats_quantifiers_drop_modifiers(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", [{"id": "1", "mr": "(2p, shoes, on, 2, feet)"},
                                        {"id": "2", "mr": "(many, birds, on, wire), (3, men, ride, horses)"}])
    s = harness.cmd_stats(src).summary
    q = s["categories"]["quantifier"]
    assert (q["labels"], q["occurrences"]) == (3, 4)
    assert q["occ_per_label"] == pytest.approx(4 / 3)
    assert q["labels_per_scene"] == pytest.approx(1.5)
    assert s["categories"]["predicate"]["labels"] == 2


def test_stats_empty(tmp_path):
    path = tmp_path / "e.jsonl"
    path.write_text("", encoding="utf-8")
    s = harness.cmd_stats(path).summary
    assert s["records"] == 0
    assert all(v == 0 for c in s["categories"].values() for v in c.values())


# ---- diversity -------------------------------------------------------------

def test_diversity_single_predicate(tmp_path):
    rows = [{"id": str(i), "candidate_sg": f"(a{i}, on, b{i})"} for i in range(4)]
    s = harness.cmd_diversity(jsonl(tmp_path / "in.jsonl", rows), "predicates").summary
    assert s["ttr"] == 0.25 and s["tokens"] == 4


def test_diversity_object_stream(tmp_path):
    rows = [{"id": "1", "candidate_sg": "(man, ride, horse), (man, has_attribute, tall)"}]
    src = jsonl(tmp_path / "in.jsonl", rows)
    s = harness.cmd_diversity(src, "objects").summary
    assert s["yules_i"] == 4.5


def test_diversity_undefined_values(tmp_path, capsys):
    rows = [{"id": "1", "candidate_sg": "(a, has_attribute, red), (b, has_attribute, blue)"}]
    src = jsonl(tmp_path / "in.jsonl", rows)
    assert cli.main(["diversity", str(src), "--category", "attributes", "--ttr-scale", "100"]) == 0
    out = capsys.readouterr().out
    assert "undefined" in out and "100.000000" in out


def test_category_tokens_strip_suffixes():
    from factualsg.sg import parse_sg
    g = parse_sg("(man:1, on, horse), (man, has_attribute, tall)")
    assert harness.category_tokens(g, "objects") == ["man", "man", "horse"]


def test_stats_with_some_rejects_exits_zero(tmp_path):
    src = jsonl(tmp_path / "in.jsonl", [{"id": "1", "mr": "(men, watch, men:1)"}, {"id": "2", "mr": "(bad"}])
    assert cli.main(["stats", str(src), "--rejects", str(tmp_path / "r.jsonl")]) == 0
    src = jsonl(tmp_path / "in2.jsonl", [{"id": "2", "mr": "(bad"}])
    assert cli.main(["stats", str(src), "--rejects", str(tmp_path / "r.jsonl")]) == 2
