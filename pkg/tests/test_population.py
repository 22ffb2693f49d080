import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fertdiffusion.emissions import intensities
from fertdiffusion.population import (
    FARM_COLUMNS,
    Population,
    PopulationError,
    assign_quartiles,
    load_population,
    max_normalize,
    synthesize_population,
    write_population,
)

from conftest import FIXTURE_CSV, make_farm


def _write(tmp_path, rows, header=FARM_COLUMNS):
    path = tmp_path / "farms.csv"
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def _row(i, area, nitrogen=100.0):
    return [i, area, 1000, 1, nitrogen, 370, 0, 0, 0, 0, 0, 1000, 1000, 3.5, 4.2]


def test_three_row_csv_size_norm(tmp_path):
    pop = load_population(_write(tmp_path, [_row(0, 10), _row(1, 20), _row(2, 40)]))
    np.testing.assert_allclose(pop.size_norm, [0.25, 0.5, 1.0])
    assert pop.size_norm.max() == 1.0


def test_negative_nitrogen_names_row(tmp_path):
    path = _write(tmp_path, [_row(0, 10), _row(1, 20, nitrogen=-5)])
    with pytest.raises(PopulationError, match=r"row 2, column .nitrogen_kg"):
        load_population(path)


def test_missing_column(tmp_path):
    path = _write(tmp_path, [r[:-1] for r in [_row(0, 10)]], header=FARM_COLUMNS[:-1])
    with pytest.raises(PopulationError, match="fat_pct"):
        load_population(path)


def test_non_numeric_cell(tmp_path):
    row = _row(0, 10)
    row[2] = "lots"
    with pytest.raises(PopulationError, match="milk_production_kg"):
        load_population(_write(tmp_path, [row]))


def test_zero_area_rejected(tmp_path):
    with pytest.raises(PopulationError, match="land_area_ha"):
        load_population(_write(tmp_path, [_row(0, 0)]))


def test_fixture_has_295_farms(pop295):
    assert len(pop295) == 295
    assert pop295.size_norm.max() == 1.0 and pop295.milk_norm.max() == 1.0


def test_fixture_matches_generator(pop295):
    fresh = synthesize_population(295, 1)
    assert fresh.farms == pop295.farms


def test_csv_roundtrip(tmp_path, pop295):
    path = tmp_path / "rt.csv"
    write_population(pop295, path)
    assert path.read_bytes() == FIXTURE_CSV.read_bytes()


def test_synthesis_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_population(synthesize_population(295, 1), a)
    write_population(synthesize_population(295, 1), b)
    assert hashlib.sha256(a.read_bytes()).digest() == hashlib.sha256(b.read_bytes()).digest()


def test_synthesis_seed_sensitive():
    assert synthesize_population(295, 1).farms != synthesize_population(295, 2).farms


def test_synthesis_mean_intensity_near_one(pop295):
    assert 0.8 <= intensities(pop295).mean() <= 1.2


def test_synthesis_rejects_tiny_n():
    with pytest.raises(PopulationError):
        synthesize_population(1, 1)


def test_quartiles_exact():
    pop = Population(tuple(make_farm(i, area=float(i + 1)) for i in range(8)))
    assert list(assign_quartiles(pop).labels) == [0, 0, 1, 1, 2, 2, 3, 3]


def test_quartiles_tie_break_by_id():
    pop = Population(tuple(make_farm(i) for i in (7, 3, 5, 1, 0, 2, 6, 4)))
    q = assign_quartiles(pop)
    assert q.sizes() == [2, 2, 2, 2]
    by_id = {f.id: lab for f, lab in zip(pop.farms, q.labels)}
    assert [by_id[i] for i in range(8)] == [0, 0, 1, 1, 2, 2, 3, 3]


def test_quartile_sizes_295(pop295):
    assert sorted(assign_quartiles(pop295).sizes()) == [73, 74, 74, 74]


def test_subset_keeps_parent_norms(pop295):
    idx = assign_quartiles(pop295).members(0)
    sub = pop295.subset(idx)
    np.testing.assert_array_equal(sub.size_norm, pop295.size_norm[idx])
    assert sub.size_norm.max() < 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=0.01, max_value=1e6), min_size=1, max_size=50))
def test_max_normalize_bounds(values):
    out = max_normalize(values)
    assert out.max() == 1.0
    assert np.all((out > 0) & (out <= 1.0))
