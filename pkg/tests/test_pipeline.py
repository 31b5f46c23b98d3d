"""Pipeline runs: hook protocol behavior, sampling, and determinism.

Hook scripts are written into tmp_path and run through sys.executable so
the tests do not depend on a shell or on PATH.
"""

import json
import shlex
import sys

import pytest

from loft import HookError, default_distribution
from loft.forms import print_logic_form
from loft.pipeline import (
    HookConfig,
    Statement,
    generate_statements,
    run_pipeline,
    sample_outputs,
    verify_statements,
)
from loft.synthesizer import SynthesisConfig, SynthesizedCandidate, synthesize_candidates
from loft.tables import CorpusEntry, Table

ECHO_GENERATOR = """\
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    print(json.dumps({"id": req["id"], "statement": req["readable"]}), flush=True)
"""

UPPER_GENERATOR = """\
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    print(json.dumps({"id": req["id"], "statement": req["readable"].upper()}), flush=True)
"""

REJECT_ALL_VERIFIER = """\
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    print(json.dumps({"id": req["id"], "entailed": False}), flush=True)
"""

GARBAGE_HOOK = """\
import sys
for line in sys.stdin:
    print("this is not json", flush=True)
"""

SWALLOW_FIRST_GENERATOR = """\
import json, sys
first = True
for line in sys.stdin:
    req = json.loads(line)
    if first:
        first = False
        continue
    print(json.dumps({"id": req["id"], "statement": "kept " + req["id"]}), flush=True)
"""

STALE_ECHO_GENERATOR = """\
import json, sys
previous = None
for line in sys.stdin:
    req = json.loads(line)
    if previous is not None:
        print(json.dumps({"id": previous, "statement": "stale answer"}), flush=True)
    print(json.dumps({"id": req["id"], "statement": "fresh " + req["id"]}), flush=True)
    previous = req["id"]
"""

QUITTER_HOOK = """\
import sys
line = sys.stdin.readline()
sys.exit(0)
"""


def hook_command(tmp_path, name, body):
    script = tmp_path / name
    script.write_text(body, encoding="utf-8")
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(script))}"


@pytest.fixture(scope="module")
def candidates(bundled_corpus):
    entry = bundled_corpus[0]
    config = SynthesisConfig(candidates_per_column_set=4, seed=13)
    result = synthesize_candidates(entry.table, None, config, default_distribution())
    assert result.candidates
    return result.candidates


@pytest.fixture(scope="module")
def tables(bundled_corpus):
    return {e.table.table_id: e.table for e in bundled_corpus}


class TestGeneratorHooks:
    def test_echo_hook_matches_builtin(self, tmp_path, candidates):
        command = hook_command(tmp_path, "echo.py", ECHO_GENERATOR)
        via_hook = generate_statements(candidates, HookConfig(command, timeout=30.0))
        builtin = generate_statements(candidates, HookConfig())
        assert [st.text for st in via_hook] == [st.text for st in builtin]
        assert [st.logic_form for st in via_hook] == [st.logic_form for st in builtin]

    def test_hook_text_is_used_verbatim(self, tmp_path, candidates):
        command = hook_command(tmp_path, "upper.py", UPPER_GENERATOR)
        out = generate_statements(candidates, HookConfig(command, timeout=30.0))
        assert out
        for st in out:
            assert st.text == st.text.upper()

    def test_garbage_output_drops_items_without_crashing(self, tmp_path, candidates, caplog):
        command = hook_command(tmp_path, "garbage.py", GARBAGE_HOOK)
        with caplog.at_level("WARNING", logger="loft.pipeline"):
            out = generate_statements(candidates, HookConfig(command, timeout=30.0))
        assert out == []
        assert "unparseable" in caplog.text

    def test_timeout_drops_only_the_unanswered_item(self, tmp_path, candidates, caplog):
        command = hook_command(tmp_path, "swallow.py", SWALLOW_FIRST_GENERATOR)
        with caplog.at_level("WARNING", logger="loft.pipeline"):
            out = generate_statements(candidates[:3], HookConfig(command, timeout=0.5))
        texts = [st.text for st in out]
        assert len(texts) == 2
        assert all(text.startswith("kept ") for text in texts)
        assert "timed out" in caplog.text

    def test_stale_answers_are_discarded_and_resynced(self, tmp_path, candidates, caplog):
        command = hook_command(tmp_path, "stale.py", STALE_ECHO_GENERATOR)
        with caplog.at_level("WARNING", logger="loft.pipeline"):
            out = generate_statements(candidates[:3], HookConfig(command, timeout=30.0))
        assert [st.text.startswith("fresh ") for st in out] == [True, True, True]
        assert "stale" in caplog.text

    def test_unlaunchable_hook_is_fatal(self, candidates):
        with pytest.raises(HookError, match="cannot launch"):
            generate_statements(candidates, HookConfig("/nonexistent/hook-binary"))

    def test_hook_exit_mid_run_is_fatal(self, tmp_path, candidates):
        command = hook_command(tmp_path, "quitter.py", QUITTER_HOOK)
        with pytest.raises(HookError, match="mid-run"):
            generate_statements(candidates[:3], HookConfig(command, timeout=30.0))


class TestVerifierHooks:
    def test_builtin_keeps_true_statements(self, candidates, tables):
        statements = generate_statements(candidates, HookConfig())
        kept = verify_statements(statements, HookConfig(), tables)
        assert kept == statements  # synthesis only emits verify-true forms

    def test_builtin_drops_false_statements(self, candidates, tables):
        statements = generate_statements(candidates, HookConfig())
        st = statements[0]
        doctored = Statement(
            table_id=st.table_id,
            text="definitely not",
            logic_form="eq { count { all_rows } ; 99999 }",
            category=st.category,
        )
        kept = verify_statements([doctored] + statements, HookConfig(), tables)
        assert kept == statements

    def test_reject_all_hook_filters_everything(self, tmp_path, candidates, tables):
        statements = generate_statements(candidates, HookConfig())
        command = hook_command(tmp_path, "nope.py", REJECT_ALL_VERIFIER)
        kept = verify_statements(statements, HookConfig(command, timeout=30.0), tables)
        assert kept == []


def make_statements(categories):
    return [
        Statement(table_id="t", text=f"s{i}", logic_form=f"f{i}", category=cat)
        for i, cat in enumerate(categories)
    ]


class TestSampling:
    def test_small_pools_pass_through(self):
        statements = make_statements(["count", "unique"])
        out = sample_outputs(statements, 5, "random", seed=1)
        assert sorted(st.text for st in out["t"]) == ["s0", "s1"]

    def test_random_respects_k(self):
        statements = make_statements(["count"] * 10)
        out = sample_outputs(statements, 3, "random", seed=1)
        assert len(out["t"]) == 3

    def test_stratified_covers_every_category_when_k_allows(self):
        statements = make_statements(
            ["count"] * 6 + ["unique"] * 6 + ["majority"] * 6 + ["other"] * 6
        )
        for seed in range(10):
            out = sample_outputs(statements, 4, "stratified", seed=seed)
            cats = {st.category for st in out["t"]}
            assert cats == {"count", "unique", "majority", "other"}

    def test_stratified_never_beats_k(self):
        statements = make_statements(["count"] * 3 + ["unique"] * 3)
        out = sample_outputs(statements, 5, "stratified", seed=0)
        assert len(out["t"]) == 5

    def test_stratified_uses_leftovers_when_categories_run_out(self):
        statements = make_statements(["count"] * 9 + ["unique"])
        out = sample_outputs(statements, 4, "stratified", seed=2)
        assert len(out["t"]) == 4
        assert {st.category for st in out["t"]} == {"count", "unique"}

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            sample_outputs([], 3, "sorted", seed=0)

    def test_selection_ignores_other_tables(self):
        # per-table draws depend only on (seed, table_id), so adding another
        # table's statements to the batch cannot change what t gets
        statements = make_statements(["count"] * 8)
        other = [
            Statement(table_id="u", text=f"u{i}", logic_form=f"g{i}", category="count")
            for i in range(5)
        ]
        alone = sample_outputs(statements, 3, "random", seed=5)
        mixed = sample_outputs(other + statements, 3, "random", seed=5)
        assert [st.text for st in alone["t"]] == [st.text for st in mixed["t"]]


class TestRunPipeline:
    def test_end_to_end_builtin(self, tmp_path, bundled_corpus):
        out = tmp_path / "statements.jsonl"
        report = run_pipeline(
            bundled_corpus[:5],
            out,
            default_distribution(),
            k=3,
            strategy="random",
            seed=13,
            synthesis=SynthesisConfig(candidates_per_column_set=5, seed=13),
        )
        assert report.tables == 5
        assert report.candidates >= report.generated >= report.verified >= report.sampled
        assert report.execution_faithfulness == 1.0
        assert report.synthesis_failures == []

        lines = [json.loads(line) for line in out.read_text().splitlines()]
        assert [rec["table_id"] for rec in lines] == sorted(rec["table_id"] for rec in lines)
        for rec in lines:
            assert 1 <= len(rec["statements"]) <= 3
            for st in rec["statements"]:
                assert st["text"] and st["logic_form"] and st["category"]

    def test_no_duplicate_forms_even_with_overlapping_column_sets(self, tmp_path):
        # both sets contain column 0, so forms touching only that column
        # can be synthesized once per set; the run must keep a single copy
        table = Table.from_strings(
            "overlap",
            "overlap",
            ["points", "team", "year"],
            [["3", "a", "2001"], ["5", "b", "2002"], ["2", "c", "2003"],
             ["9", "d", "2004"], ["4", "e", "2005"]],
        )
        sets = ((0, 1), (0, 2))
        config = SynthesisConfig(candidates_per_column_set=20, seed=13)
        raw = synthesize_candidates(table, list(sets), config, default_distribution())
        prints = [print_logic_form(c.form) for c in raw.candidates]
        assert len(set(prints)) < len(prints)  # the overlap really repeats forms

        entry = CorpusEntry(table=table, selected_column_sets=sets)
        out = tmp_path / "overlap.jsonl"
        report = run_pipeline([entry], out, default_distribution(), k=40, seed=13,
                              synthesis=config)
        assert report.candidates == len(set(prints))
        records = [json.loads(line) for line in out.read_text().splitlines()]
        assert records
        for rec in records:
            forms = [st["logic_form"] for st in rec["statements"]]
            assert len(forms) == len(set(forms))

    def test_reruns_are_byte_identical(self, tmp_path, bundled_corpus):
        config = SynthesisConfig(candidates_per_column_set=4, seed=13)
        paths = []
        for name in ("a.jsonl", "b.jsonl"):
            path = tmp_path / name
            run_pipeline(
                bundled_corpus[:4], path, default_distribution(),
                k=3, seed=13, synthesis=config,
            )
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_seed_changes_selection(self, tmp_path, bundled_corpus):
        config = SynthesisConfig(candidates_per_column_set=6, seed=13)
        texts = []
        for seed, name in ((13, "a.jsonl"), (14, "b.jsonl")):
            path = tmp_path / name
            run_pipeline(
                bundled_corpus[:4], path, default_distribution(),
                k=2, seed=seed, synthesis=config,
            )
            texts.append(path.read_text())
        assert texts[0] != texts[1]

    def test_stratified_coverage_is_at_least_random(self, tmp_path, bundled_corpus):
        config = SynthesisConfig(candidates_per_column_set=8, seed=13)
        coverage = {}
        for strategy in ("random", "stratified"):
            path = tmp_path / f"{strategy}.jsonl"
            report = run_pipeline(
                bundled_corpus, path, default_distribution(),
                k=4, strategy=strategy, seed=13, synthesis=config,
            )
            coverage[strategy] = len(report.category_histogram)
        assert coverage["stratified"] >= coverage["random"]

    def test_report_json_is_stable(self, tmp_path, bundled_corpus):
        report = run_pipeline(
            bundled_corpus[:2], tmp_path / "out.jsonl", default_distribution(),
            k=2, seed=13, synthesis=SynthesisConfig(candidates_per_column_set=3, seed=13),
        )
        payload = report.to_json()
        assert payload["tables"] == 2
        assert list(payload) == [
            "tables", "candidates", "generated", "verified", "sampled",
            "seed", "k", "strategy", "category_histogram",
            "synthesis_failures", "shortfalls", "execution_faithfulness",
        ]
        assert json.dumps(payload) == json.dumps(report.to_json())
