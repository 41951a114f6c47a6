"""Shared fixtures: repo paths, the worked sorting example and its four
candidate preconditions, and small helpers used across test modules."""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from fuzzfeed.corpus import BenchmarkSet, Category, load_corpus
from fuzzfeed.evaluation import BenchmarkReport, ProgramRow
from fuzzfeed.minilang import parse

REPO_ROOT = Path(__file__).resolve().parents[1]
CORPUS_DIR = REPO_ROOT / "corpus" / "builtin"
FIXTURES_DIR = REPO_ROOT / "fixtures"


# The four candidate preconditions of the worked sorting example, in the
# order a model plausibly produces them: a length-only guess (invalid), a
# valid but over-strong repair (extra c-length clause), a regression that
# drops the sortedness clause, and the accepted weakest form.

LENGTH_ONLY_WP = """\
// Precondition: 'a' and 'b' must have the same
// non-zero length,
// and 'c' should be at least of length 'a'.
bool precondition(int[] a, int[] b, int[] c) {
    return len(a) > 0 && len(a) == len(b) && len(c) >= len(a);
}
"""

STRONG_WP = """\
// Precondition: 'a' and 'b' must have the same
// non-zero length,
// 'c' should be at least of length 'a',
// and 'a' must be sorted in non-decreasing order
// to ensure 'b' remains sorted.
bool precondition(int[] a, int[] b, int[] c) {
    if (len(a) == 0 || len(a) != len(b) || len(c) < len(a)) {
        return false;
    }
    for (int i = 0; i < len(a) - 1; i = i + 1) {
        if (a[i] > a[i + 1]) {
            return false;
        }
    }
    return true;
}
"""

REGRESSED_WP = """\
// Precondition: 'a' and 'b' must have the same
// non-zero length,
// and 'c' must have a length that is
// irrelevant to the execution success of 'foo'.
// Additionally, 'a' naturally
// becomes sorted when it has identical elements.
bool precondition(int[] a, int[] b, int[] c) {
    return len(a) > 0 && len(a) == len(b);
}
"""

WEAKEST_WP = """\
// Precondition: 'a' and 'b' must have the same
// non-zero length,
// and 'a' must be sorted in non-decreasing order,
// since 'b' is a direct clone of 'a' before
// sorting the clone.
bool precondition(int[] a, int[] b, int[] c) {
    if (len(a) == 0 || len(a) != len(b)) {
        return false;
    }
    for (int i = 0; i < len(a) - 1; i = i + 1) {
        if (a[i] > a[i + 1]) {
            return false;
        }
    }
    return true;
}
"""


@pytest.fixture(scope="session")
def builtin_set() -> BenchmarkSet:
    return load_corpus(CORPUS_DIR)


@pytest.fixture(scope="session")
def sorting_copy(builtin_set):
    return builtin_set.by_id("sorting_copy")


@pytest.fixture(scope="session")
def sorting_copy_ast(sorting_copy):
    return parse(sorting_copy.program_source)


def with_precondition(program_source: str, precondition_source: str):
    """Parse the program with the given precondition attached."""
    return parse(program_source.rstrip() + "\n\n" + precondition_source)


def make_single_program_set(program, truth_source: str):
    """A one-program benchmark set with a substituted ground truth."""
    from dataclasses import replace

    from fuzzfeed.corpus import BenchmarkSet
    return BenchmarkSet(
        name="single",
        programs=(replace(program, truth_source=truth_source),))


def scripted_responses(program_source: str, *preconditions: str,
                       fence=(0, 3)) -> list[str]:
    """Full-program responses for a scripted provider, some code-fenced."""
    out = []
    for i, pre in enumerate(preconditions):
        text = program_source.rstrip() + "\n\n" + pre
        if i in fence:
            text = "```\n" + text + "\n```"
        out.append(text)
    return out


# Per-iteration category counts matching a published-style five-iteration
# summary: avg% must come out 83.00 / 91.67 / 67.50 / 96.67.

_TABLE_COUNTS = {
    Category.EXISTENTIAL: dict(
        n=20, correct=[16, 17, 17, 16, 17], usage=[5, 7, 6, 6, 6],
        success=[5, 6, 6, 5, 6]),
    Category.UNIVERSAL: dict(
        n=36, correct=[32, 33, 33, 34, 33], usage=[4, 5, 4, 4, 5],
        success=[3, 4, 4, 4, 4]),
    Category.SORTING: dict(
        n=8, correct=[5, 5, 6, 5, 6], usage=[3, 3, 4, 3, 3],
        success=[2, 2, 3, 2, 3]),
    Category.SEARCH: dict(
        n=6, correct=[6, 6, 6, 5, 6], usage=[2, 3, 2, 2, 3],
        success=[2, 3, 2, 1, 3]),
}


def table_style_report(configuration: str = "GPT-4o-FG",
                       set_name: str = "table") -> BenchmarkReport:
    """Synthesize detail rows realizing the per-iteration counts above."""
    rows = []
    for category, counts in _TABLE_COUNTS.items():
        n = counts["n"]
        ids = [f"{category.value.lower()}_{i:02d}" for i in range(n)]
        for it in range(1, 6):
            correct = counts["correct"][it - 1]
            usage = counts["usage"][it - 1]
            success = counts["success"][it - 1]
            for j, pid in enumerate(ids):
                # Lay out flags so per-iteration sums hit the targets:
                # the first `success` programs are repaired and correct,
                # the next usage-success repaired but wrong, then enough
                # unrepaired correct programs to reach the correct count.
                fg_used = j < usage
                if j < usage:
                    correct_flag = j < success
                else:
                    correct_flag = j < usage + (correct - success)
                rows.append(ProgramRow(
                    iteration=it, program_id=pid, category=category,
                    outcome="accepted", fg_used=fg_used,
                    correct=correct_flag, cycles=int(fg_used),
                    llm_calls=1 + int(fg_used)))
    report = BenchmarkReport(configuration=configuration, set_name=set_name,
                             k=5, rows=tuple(sorted(
                                 rows, key=lambda r: (r.iteration, r.program_id))))
    # Self-check the synthesis before any test relies on it.
    for summary in report.summaries():
        counts = _TABLE_COUNTS[Category(summary.benchmark)]
        assert summary.correct_avg == Fraction(sum(counts["correct"]), 5)
        assert summary.fg_usage_avg == Fraction(sum(counts["usage"]), 5)
        assert summary.fg_success_avg == Fraction(sum(counts["success"]), 5)
    return report
