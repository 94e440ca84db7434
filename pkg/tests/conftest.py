import sys
from pathlib import Path

import pytest

from gradebox import specdsl
from gradebox.config import ServiceConfig
from gradebox.store import Store

REPO_ROOT = Path(__file__).resolve().parent.parent
EXERCISES_DIR = REPO_ROOT / "exercises"

# The exercise definition from the course's heads/shoulders/knees/toes
# problem, exactly as it appears in an authored lesson (note the wrapped
# solver value and the unquoted repeats).
HEADS_TEXT = """[pyBox repeats=3 precode="people = _rint(10, 100)"
autotests="heads\\nshoulders\\nknees\\ntoes"
solver="heads, shoulders, knees, toes =
people, 2*people, 2*people, 10*people"]"""

HEADS_SOLVER = "heads, shoulders, knees, toes = people, 2*people, 2*people, 10*people"


@pytest.fixture(scope="session")
def heads_spec():
    return specdsl.parse_shortcode(HEADS_TEXT, exercise_id="heads-shoulders")


@pytest.fixture(scope="session")
def corpus():
    return specdsl.load_exercise_dir(EXERCISES_DIR, strict=True)


@pytest.fixture()
def store(tmp_path):
    with Store(tmp_path / "test.db") as s:
        yield s


@pytest.fixture()
def clocked_store(tmp_path):
    """Store with a controllable clock; yields (store, advance_seconds)."""
    state = {"t": 1_700_000_000.0}

    def clock():
        return state["t"]

    def advance(seconds):
        state["t"] += seconds

    with Store(tmp_path / "clocked.db", clock=clock) as s:
        yield s, advance


@pytest.fixture()
def client(tmp_path):
    from fastapi.testclient import TestClient

    from gradebox.service import create_app

    config = ServiceConfig(
        store_path=str(tmp_path / "svc.db"),
        exercise_dir=str(EXERCISES_DIR),
        staff_names=("staff-alice",),
        test_mode=True,
    )
    app = create_app(config)
    with TestClient(app) as c:
        yield c


def register(client, name):
    response = client.post("/api/register", json={"name": name})
    assert response.status_code == 200, response.text
    body = response.json()
    return body["user_id"], {"Authorization": f"Bearer {body['token']}"}


def python_cmd(*args):
    return [sys.executable, "-m", "gradebox.authorctl", *args]
