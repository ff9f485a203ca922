from pathlib import Path

import numpy as np
import pytest

from hocones.expr import evaluate
from hocones.problemfile import ProblemFileError, load, loads
from hocones.sets import Implicit, ParametricCurve, PointCloud, Union, distance

DEMOS = Path(__file__).resolve().parents[1] / "demos" / "problems"

CUSP = """\
# comment lines and blank lines are ignored
[problem]
dimension = 2
variables = a, b
objective = -a + b^3
point = 0, 0

[set]
kind = parametric
components = s^3 ; s^2
domain = 0, 2

[collections]
up = 0, 1
two = 0, 1 ; 1, 0
first = none

[config]
levels = 20
radii = 0.5, 1
resolution = 8
"""


def test_full_file():
    p = loads(CUSP)
    assert p.dimension == 2 and p.variables == ["a", "b"]
    assert isinstance(p.set, ParametricCurve)
    assert evaluate(p.objective, [2.0, 1.0]) == -1.0
    assert np.array_equal(p.point, [0, 0])
    assert [h.tolist() for h in p.collections["two"]] == [[0, 1], [1, 0]]
    assert p.collections["first"] == []
    assert p.scan_config().schedule.levels == 20
    cfg = p.sample_config()
    assert cfg.resolution == 8 and cfg.radii == (0.5, 1.0)


def test_defaults():
    p = loads("[problem]\ndimension = 3\n[set]\nkind = implicit\n")
    assert p.objective is None and list(p.variables) == ["x1", "x2", "x3"]
    assert np.array_equal(p.point, np.zeros(3))
    assert isinstance(p.set, Implicit)
    assert p.scan_config().schedule.ratio == 0.25


def test_repeated_sets_form_a_union():
    p = loads("[problem]\ndimension = 2\n[set]\nkind = points\npoints = 0, 0\n"
              "[set]\nkind = points\npoints = 3, 0 ; 4, 0\n")
    assert isinstance(p.set, Union)
    assert all(isinstance(m, PointCloud) for m in p.set.members)
    assert distance(p.set, [2.5, 0.0]).value == 0.5


def test_implicit_and_benchmark_sets():
    p = loads("[problem]\ndimension = 2\n[set]\nkind = implicit\nequalities = x1 - x2\n"
              "inequalities = -x1 ; x1 - 1\nbox = -2, 2\n")
    assert distance(p.set, [2.0, 0.0]).value == pytest.approx(np.sqrt(2), abs=1e-9)  # nearest point (1, 1)
    p = loads("[problem]\ndimension = 2\n[set]\nkind = benchmark\nname = cusp\nform = implicit\n")
    assert distance(p.set, [0.0, 0.0]).value <= 1e-12


@pytest.mark.parametrize("text, line, fragment", [
    ("[problem]\ndimension = 2\nbogus = 1\n[set]\nkind = implicit\n", 3, "unknown key"),
    ("[problem]\ndimension = 2\n[sets]\n", 3, "unknown section"),
    ("[problem]\ndimension = 2\n[problem]\n", 3, "appears twice"),
    ("[problem]\ndimension = 2\ndimension = 3\n", 3, "duplicate key"),
    ("[problem]\ndimension = two\n", 2, "integer"),
    ("[problem]\ndimension = 2\npoint = 1, 2, 3\n[set]\nkind = implicit\n", 3, "components"),
    ("[problem]\ndimension = 2\nobjective = x1 +\n[set]\nkind = implicit\n", 3, "objective"),
    ("[problem]\ndimension = 2\n\n[set]\nkind = blob\n", 5, "unknown set kind"),
    ("[problem]\ndimension = 2\n[set]\nkind = points\npoints = 0, 0\nbox = 0, 1\n", 6, "does not apply"),
    ("[problem]\ndimension = 2\n[set]\nkind = parametric\ncomponents = s\ndomain = 0, 1\n", 5, "expected 2"),
    ("[problem]\ndimension = 2\n[set]\nkind = parametric\ncomponents = s ; s\ndomain = 1, 0\n", 6, "domain"),
    ("[problem]\ndimension = 2\n[set]\nkind = benchmark\nname = torus\n", 5, "unknown benchmark"),
    ("[problem]\ndimension = 2\n[set]\nkind = implicit\n[collections]\nh = 1\n", 6, "collection h"),
    ("[problem]\ndimension = 2\n[set]\nkind = implicit\n[config]\nt0 = fast\n", 6, "expected a number"),
    ("x = 1\n", 1, "outside"),
    ("[problem\n", 1, "malformed"),
    ("[problem]\njust text\n", 2, "key = value"),
])
def test_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ProblemFileError) as info:
        loads(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}: ")
    assert fragment in str(info.value)


@pytest.mark.parametrize("text, fragment", [
    ("[set]\nkind = implicit\n", "missing [problem]"),
    ("[problem]\ndimension = 2\n", "missing [set]"),
    ("[problem]\ndimension = 2\n[set]\nkind = implicit\n[config]\nratio = 2\n", "ratio"),
])
def test_errors_without_a_line(text, fragment):
    with pytest.raises(ProblemFileError) as info:
        loads(text)
    assert fragment in str(info.value)


@pytest.mark.parametrize("path", sorted(DEMOS.glob("*.prob")), ids=lambda p: p.name)
def test_demo_problems_load(path):
    p = load(path)
    assert p.dimension >= 1
    assert distance(p.set, p.point).value <= 1e-8
