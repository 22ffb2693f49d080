from pathlib import Path

import pytest

from fertdiffusion.config import default_config
from fertdiffusion.network import watts_strogatz
from fertdiffusion.population import Farm, Population, load_population

DATA = Path(__file__).parent / "data"
FIXTURE_CSV = DATA / "farms_295_seed1.csv"


def make_farm(i, area=10.0, milk=1000.0, nitrogen=100.0, **kw):
    values = dict(
        id=i,
        land_area_ha=area,
        milk_production_kg=milk,
        livestock_units=1.0,
        nitrogen_kg=nitrogen,
        can_kg=nitrogen / 0.27,
        urea_kg=0.0,
        pu_kg=0.0,
        p_kg=0.0,
        k_kg=0.0,
        lime_t=0.0,
        total_emissions_kg=1000.0,
        fpcm_kg=1000.0,
        protein_pct=3.5,
        fat_pct=4.2,
    )
    values.update(kw)
    return Farm(**values)


def uniform_population(n, **kw):
    return Population(tuple(make_farm(i, **kw) for i in range(n)))


@pytest.fixture(scope="session")
def pop295():
    return load_population(FIXTURE_CSV)


@pytest.fixture(scope="session")
def net295():
    return watts_strogatz(295, 4, 0.1, 1)


@pytest.fixture(scope="session")
def study_config():
    return default_config()


# Acceptance criteria report one line each at the end of the session.
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (k[0], int(k[1:]))):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
