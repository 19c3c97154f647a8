import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvrpsuite.data import CMT_NAMES, instance_text, load_cmt, optimum_registry
from cvrpsuite.instance import (
    EXACT, NEAREST_INTEGER, Instance, InstanceFormatError, InstanceSemanticError, Solution,
    UnsupportedFeatureError, build_distances, format_solution, gap, parse_cvrplib,
    parse_solution, read_cvrplib, solution_cost, to_cvrplib, validate, write_cvrplib,
)

TINY = """NAME : tiny
TYPE : CVRP
DIMENSION : 2
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 1
NODE_COORD_SECTION
1 0 0
2 1 0
DEMAND_SECTION
1 0
2 1
DEPOT_SECTION
 1
 -1
EOF
"""

# five customers, two routes within Q = 10
FIVE = Instance("five", (0, 0), ((0, 2, 3), (2, 2, 4), (2, 0, 3), (-2, 0, 5), (-2, -2, 4)), 10)


def test_cmt_headers():
    expected = {"CMT1": (50, 160), "CMT2": (75, 140), "CMT3": (100, 200), "CMT11": (120, 200)}
    for name in CMT_NAMES:
        inst = load_cmt(name)
        assert (inst.n, inst.capacity) == expected[name]
        assert inst.distance_rounding == EXACT


def test_minimal_file():
    inst = parse_cvrplib(TINY)
    assert inst.n == 1
    assert inst.capacity == 1
    assert inst.depot == (0.0, 0.0)
    assert inst.customers == ((1.0, 0.0, 1),)


def test_depot_detected_from_zero_demand():
    text = TINY.replace("DEPOT_SECTION\n 1\n -1\n", "")
    assert parse_cvrplib(text).depot == (0.0, 0.0)


def test_depot_not_first():
    text = TINY.replace(" 1\n -1", " 2\n -1").replace("2 1\nDEPOT", "2 0\nDEPOT").replace("1 0\n2", "1 1\n2")
    inst = parse_cvrplib(text)
    assert inst.depot == (1.0, 0.0)
    assert inst.customers == ((0.0, 0.0, 1),)


def test_ambiguous_depot():
    text = TINY.replace("DEPOT_SECTION\n 1\n -1\n", "").replace("2 1\n", "2 0\n")
    with pytest.raises(InstanceFormatError, match="ambiguous"):
        parse_cvrplib(text)


@pytest.mark.parametrize("edit, err", [
    (("EUC_2D", "GEO"), UnsupportedFeatureError),
    (("DIMENSION : 2", "DIMENSION : 3"), InstanceFormatError),
    (("CAPACITY : 1\n", ""), InstanceFormatError),
    (("2 1\nDEPOT", "2 -1\nDEPOT"), InstanceSemanticError),
    (("2 1\nDEPOT", "2 2\nDEPOT"), InstanceSemanticError),
    (("2 1 0\n", "2 x 0\n"), ValueError),
])
def test_parse_errors(edit, err):
    with pytest.raises(err):
        parse_cvrplib(TINY.replace(*edit))


def test_unsupported_section():
    with pytest.raises(UnsupportedFeatureError):
        parse_cvrplib(TINY.replace("DEPOT_SECTION", "EDGE_WEIGHT_SECTION"))


def test_nearest_integer_rounding():
    text = TINY.replace("2 1 0", "2 1.4 0").replace("EUC_2D\n", "EUC_2D\nROUNDING : NEAREST_INTEGER\n")
    inst = parse_cvrplib(text)
    assert inst.distance_rounding == NEAREST_INTEGER
    assert inst.distances[0, 1] == 1.0
    assert parse_cvrplib(text, rounding=EXACT).distances[0, 1] == pytest.approx(1.4)


def test_distances():
    inst = Instance("d", (0, 0), ((3, 4, 1), (3, 4, 1)), 5)
    d = build_distances(inst)
    assert d[0, 1] == 5.0
    assert d[1, 2] == 0.0
    assert np.array_equal(d, d.T)


def test_cmt1_depot_to_first_customer():
    # coordinates straight from the file
    lines = instance_text("CMT1").splitlines()
    i = lines.index("NODE_COORD_SECTION")
    _, x0, y0 = lines[i + 1].split()
    _, x1, y1 = lines[i + 2].split()
    by_hand = math.sqrt((float(x1) - float(x0)) ** 2 + (float(y1) - float(y0)) ** 2)
    assert load_cmt("CMT1").distances[0, 1] == pytest.approx(by_hand, rel=1e-15)


def test_solution_cost_examples():
    inst = Instance("c", (0, 0), ((2, 0, 1),), 1)
    assert solution_cost(inst, [[1]]) == 4.0
    assert solution_cost(inst, []) == 0.0


def test_solution_cost_leg_by_leg():
    routes = [[1, 2, 3], [4, 5]]
    pts = [(0, 0), (0, 2), (2, 2), (2, 0), (-2, 0), (-2, -2)]
    legs = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5), (5, 0)]
    expected = sum(math.dist(pts[a], pts[b]) for a, b in legs)
    assert solution_cost(FIVE, routes) == pytest.approx(expected, rel=1e-12)
    # frozen: 2 + 2 + 2 + 2 + 2 + 2 + sqrt(8)
    assert solution_cost(FIVE, routes) == pytest.approx(12 + math.sqrt(8), rel=1e-12)


def test_validate_feasible_two_routes():
    sol = Solution.from_routes(FIVE, [[1, 2, 3], [4, 5]])
    report = validate(FIVE, sol)
    assert report.feasible
    assert not report


def test_validate_duplicate_and_missing():
    sol = Solution.from_routes(FIVE, [[1, 3, 3], [4, 5]])
    report = validate(FIVE, sol)
    assert ("duplicate", 3) in [(v.kind, v.customer) for v in report]
    assert ("missing", 2) in [(v.kind, v.customer) for v in report]


def test_validate_capacity_overload():
    sol = Solution.from_routes(FIVE, [[1, 2, 5], [3, 4]])  # 3 + 4 + 4 = 11 = Q + 1
    report = validate(FIVE, sol)
    caps = [v for v in report if v.kind == "capacity"]
    assert len(caps) == 1
    assert caps[0].amount == 1
    assert caps[0].route == 0


def test_validate_unknown_and_cost_mismatch():
    report = validate(FIVE, Solution(((1, 2, 3), (4, 5, 9)), 0.0))
    assert "unknown" in report.kinds()
    good = Solution.from_routes(FIVE, [[1, 2, 3], [4, 5]])
    bad = Solution(good.routes, good.cost + 1.0)
    assert validate(FIVE, bad).kinds() == ["cost"]


def test_validate_never_raises_on_garbage():
    report = validate(FIVE, Solution((), 0.0))
    assert report.kinds().count("missing") == 5


def test_gap_examples():
    assert gap(562.1, 524.6) == pytest.approx(0.0715, abs=5e-4)
    assert round(100 * gap(562.1, 524.6), 1) == 7.1
    assert round(100 * gap(836.2, 835.2), 1) == 0.1
    assert gap(524.6, 524.6) == 0.0
    with pytest.raises(ValueError):
        gap(1.0, 0.0)


def test_registry_values():
    assert optimum_registry() == {"CMT1": 524.6, "CMT2": 835.2, "CMT3": 826.1, "CMT11": 1042.1}


@pytest.mark.parametrize("name", CMT_NAMES)
def test_cmt_round_trip_byte_stable(name, tmp_path):
    inst = load_cmt(name)
    text = to_cvrplib(inst)
    again = parse_cvrplib(text)
    assert again == inst
    assert to_cvrplib(again) == text
    write_cvrplib(inst, tmp_path / "x.vrp")
    assert read_cvrplib(tmp_path / "x.vrp") == inst


def test_solution_text_round_trip():
    sol = Solution.from_routes(FIVE, [[1, 2, 3], [4, 5]])
    assert format_solution(sol) == f"Route #1: 1 2 3\nRoute #2: 4 5\nCost {sol.cost!r}\n"
    assert parse_solution(format_solution(sol)) == sol
    with pytest.raises(InstanceFormatError):
        parse_solution("Route #1: 1\n")


def test_instance_rejects_bad_data():
    with pytest.raises(InstanceSemanticError):
        Instance("x", (0, 0), (), 1)
    with pytest.raises(InstanceSemanticError):
        Instance("x", (0, 0), ((1, 1, 0),), 1)
    with pytest.raises(ValueError):
        Instance("x", (0, 0), ((1, 1, 1),), 1, distance_rounding="floor")


def test_fractional_demands_kept():
    inst = Instance("f", (0, 0), ((1, 1, 0.25), (2, 2, 0.5)), 1)
    assert inst.customers[0][2] == 0.25
    assert parse_cvrplib(to_cvrplib(inst)) == inst


coord = st.floats(-1000, 1000, allow_nan=False).map(lambda v: round(v, 3))


@st.composite
def instances(draw):
    n = draw(st.integers(1, 8))
    cap = draw(st.integers(1, 50))
    customers = tuple((draw(coord), draw(coord), draw(st.integers(1, cap))) for _ in range(n))
    return Instance("h", (draw(coord), draw(coord)), customers, cap)


@settings(max_examples=60, deadline=None)
@given(instances(), st.randoms(use_true_random=False))
def test_reversed_route_same_cost(inst, rnd):
    route = list(range(1, inst.n + 1))
    rnd.shuffle(route)
    assert solution_cost(inst, [route]) == pytest.approx(solution_cost(inst, [route[::-1]]),
                                                         rel=1e-12, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(instances())
def test_round_trip_property(inst):
    assert parse_cvrplib(to_cvrplib(inst)) == inst


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e6), st.floats(1e-3, 1e6), st.floats(1e-3, 1e3))
def test_gap_scale_invariant(p, o, k):
    assert gap(k * p, k * o) == pytest.approx(gap(p, o), rel=1e-9, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(instances())
def test_valid_report_means_cost_matches(inst):
    sol = Solution.from_routes(inst, [[c] for c in range(1, inst.n + 1)])
    assert validate(inst, sol).feasible
    assert math.isclose(solution_cost(inst, sol.routes), sol.cost, rel_tol=1e-9)
