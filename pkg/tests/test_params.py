import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hullforge.errors import ArityError, NonFiniteError, RangeViolation, ValidationError
from hullforge.params import (
    COLUMNS,
    FLAG_INDICES,
    N_PARAMS,
    PARAM_SPECS,
    HullParameters,
    midrange_vector,
    snap_flags,
    validate_params,
)

# Independent copy of the range table: (lo, hi) open intervals, None for flags.
RANGES = {
    "LOA": (0, math.inf), "Lb": (0.05, 0.9), "Ls": (0, 0.9), "Bd": (0.0833, 0.333), "Dd": (0.05, 0.25),
    "Bs": (0, 1), "WL": (0, 1), "Bc": (0.05, 0.5), "Beta": (0, 45), "Rc": (0, 1), "Rk": (-1, 1),
    "BOW(A)": (-4, 4), "BOW(B)": (-4, 4), "BK": (0, 1), "Kappa_BOW": (0, 1),
    "DELTA_BOW(A)": (-4, 4), "DELTA_BOW(B)": (-4, 4), "DRIFT(A)": (-4, 4), "DRIFT(B)": (-4, 4),
    "DRIFT(C)": (0, 60), "bit_EP_S": None, "bit_EP_T": None, "TRANS(A)": (-3, 5), "SK": (0, 1),
    "Kappa_STERN": (0, 1), "DELTA_STERN(A)": (-4, 4), "DELTA_STERN(B)": (-4, 4),
    "Beta_trans": (0, 60), "Bc_trans": (0, 0.5), "Rc_trans": (0, 0.5), "Rk_trans": (-1, 1),
    "bit_BB": None, "bit_SB": None, "Lbb": (0, 0.2), "Hbb": (0, 1), "Bbb": (0, 1),
    "Lbbm": (-1, 1), "Rbb": (0.05, 0.33), "Kappa_SB": (0, 1), "Lsb": (0, 0.2),
    "HsboA": (0, 1), "Hsb": (0, 1), "Bsb": (0, 1), "Lsbm": (-1, 1), "Rsb": (0.05, 0.33),
}


def reference_accepts(v) -> bool:
    for name, x in zip(COLUMNS, v):
        r = RANGES[name]
        if r is None:
            if min(abs(x), abs(x - 1.0)) > 1e-9:
                return False
        elif not r[0] < x < r[1]:
            return False
    return True


def test_table_shape():
    assert N_PARAMS == 45
    assert list(COLUMNS) == list(RANGES)
    assert len(HullParameters.__dataclass_fields__) == 45


def test_range_table_matches_reference():
    for s in PARAM_SPECS:
        r = RANGES[s.column]
        if s.flag:
            assert r is None
        else:
            assert (s.lo, s.hi) == r


def test_midrange_row_is_valid():
    p = validate_params(midrange_vector())
    assert p.loa == 10.0 and p.lb == pytest.approx(0.475)


def test_bd_too_wide_reports_violation():
    v = midrange_vector()
    v[COLUMNS.index("Bd")] = 0.5
    with pytest.raises(ValidationError) as ei:
        validate_params(v)
    assert ei.value.violations == [RangeViolation("Bd", 0.5, 0.0833, 0.333)]


def test_negative_keel_radius_accepted():
    v = midrange_vector()
    v[COLUMNS.index("Rk")] = -0.5
    assert validate_params(v).rk == -0.5


def test_all_violations_reported():
    v = midrange_vector()
    v[COLUMNS.index("Bd")] = 0.5
    v[COLUMNS.index("Rbb")] = 0.9
    v[COLUMNS.index("bit_BB")] = 0.5
    with pytest.raises(ValidationError) as ei:
        validate_params(v)
    assert sorted(e.field for e in ei.value.violations) == ["Bd", "Rbb", "bit_BB"]


@pytest.mark.parametrize("n", [0, 44, 46])
def test_arity(n):
    with pytest.raises(ArityError):
        validate_params(np.zeros(n))


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite(bad):
    v = midrange_vector()
    v[3] = bad
    with pytest.raises(NonFiniteError):
        validate_params(v)


@pytest.mark.parametrize("value,expected", [(1.0 - 5e-10, 1), (3e-10, 0), (1.0, 1)])
def test_flag_coercion(value, expected):
    v = midrange_vector()
    v[COLUMNS.index("bit_BB")] = value
    p = validate_params(v)
    assert p.bit_bb == expected and isinstance(p.bit_bb, int)


def test_flag_outside_tolerance_rejected():
    v = midrange_vector()
    v[COLUMNS.index("bit_SB")] = 1.0 + 1e-6
    with pytest.raises(ValidationError):
        validate_params(v)


def test_loa_override():
    p = validate_params(midrange_vector(), loa=25.0)
    assert p.loa == 25.0
    with pytest.raises(ValidationError):
        validate_params(midrange_vector(), loa=0.0)


def test_open_interval_bounds_rejected():
    for i, s in enumerate(PARAM_SPECS):
        if s.flag or not math.isfinite(s.hi):
            continue
        for edge in (s.lo, s.hi):
            v = midrange_vector()
            v[i] = edge
            with pytest.raises(ValidationError):
                validate_params(v)


def test_range_closure_fuzz():
    # 10,000 vectors drawn from a box slightly wider than the table
    rng = np.random.default_rng(7)
    lo = np.array([0.0 if s.flag else (s.lo if math.isfinite(s.lo) else -1) for s in PARAM_SPECS])
    hi = np.array([1.0 if s.flag else (s.hi if math.isfinite(s.hi) else 20) for s in PARAM_SPECS])
    span = hi - lo
    for _ in range(10_000):
        v = rng.uniform(lo - 0.08 * span, hi + 0.08 * span)
        flags = rng.random(len(FLAG_INDICES)) < 0.9
        v[list(FLAG_INDICES)] = np.where(flags, rng.integers(0, 2, len(FLAG_INDICES)), v[list(FLAG_INDICES)])
        try:
            validate_params(v)
            ok = True
        except ValidationError:
            ok = False
        assert ok == reference_accepts(v)


def test_round_trip_vector():
    v = midrange_vector()
    v[COLUMNS.index("bit_BB")] = 1.0
    p = validate_params(v)
    np.testing.assert_array_equal(p.to_vector(), v)
    assert validate_params(p.to_vector()) == p


def test_digest_stable_and_sensitive(mid_params):
    assert mid_params.digest() == validate_params(midrange_vector()).digest()
    assert mid_params.digest() != mid_params.replace(bd=0.2).digest()


@given(st.lists(st.floats(-2, 3, allow_nan=False), min_size=N_PARAMS, max_size=N_PARAMS))
def test_snap_flags_only_touches_flags(row):
    row = np.array(row)
    out = snap_flags(row)
    mask = np.zeros(N_PARAMS, bool)
    mask[list(FLAG_INDICES)] = True
    np.testing.assert_array_equal(out[~mask], row[~mask])
    assert set(out[mask]).issubset({0.0, 1.0})


@settings(max_examples=60)
@given(st.integers(0, N_PARAMS - 1), st.floats(-1e3, 1e3, allow_nan=False))
def test_single_field_perturbation(i, value):
    v = midrange_vector()
    v[i] = value
    try:
        validate_params(v)
        accepted = True
    except ValidationError as exc:
        accepted = False
        assert [e.field for e in exc.violations] == [COLUMNS[i]]
    assert accepted == reference_accepts(v)
