from pathlib import Path

import pytest

from poirec.domain import AversionDeclaration, Dataset, FeatureSchema, ItemProfile, UserProfile

SAMPLE_DIR = Path(__file__).resolve().parents[1] / "src" / "poirec" / "data" / "sample"

TWO_FEATURES = FeatureSchema.from_pairs([("noise", "increasing"), ("brightness", "vshaped")])


def make_user(uid="u1", prefs=None, noise=5, brightness=(3, 4), ratings=None):
    prefs = prefs or {"park": 4, "museum": 2}
    avs = {
        "noise": AversionDeclaration("noise", noise),
        "brightness": AversionDeclaration("brightness", brightness[1], brightness[0]),
    }
    return UserProfile(uid, prefs, avs, ratings or {})


def make_item(iid, category="park", noise=1.0, brightness=3.0):
    return ItemProfile(iid, f"Item {iid}", category, (noise, brightness))


@pytest.fixture
def small_dataset():
    items = [make_item("a", "park", 1.0, 2.6), make_item("b", "museum", 4.0, 1.0), make_item("c", "park", 5.0, 5.0)]
    users = [
        make_user("u1", ratings={"a": 5, "b": 2}),
        make_user("u2", prefs={"park": 1, "museum": 5}, noise=2, brightness=(1, 1), ratings={"c": 3}),
    ]
    return Dataset(TWO_FEATURES, ("park", "museum"), users, items)


@pytest.fixture
def sample_dir():
    return SAMPLE_DIR


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
