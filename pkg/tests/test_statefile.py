import json
from pathlib import Path

import numpy as np
import pytest

from collisionlab import statefile
from collisionlab.statefile import InputError

FIXTURE = Path(__file__).resolve().parents[1] / "fixtures" / "states.json"


def test_fixture_objects():
    sf = statefile.load(FIXTURE)
    assert np.allclose(sf.density("quarter"), np.diag([0.25, 0.75]))
    tilted = sf.density("tilted")
    assert tilted[0, 1] == pytest.approx(0.1 - 0.2j)
    assert sf.channel("bsc").alphabet_size == 2
    src = sf.cq_state("qubit_source")
    assert src.probs.tolist() == [0.3, 0.7]
    assert len(sf.sha256) == 64


def test_round_trip(rng):
    m = np.array([[0.6, 0.1 - 0.2j], [0.1 + 0.2j, 0.4]])
    text = json.dumps({"schema_version": 1, "objects": {"m": statefile.matrix_to_json(m)}})
    assert np.allclose(statefile.loads(text).density("m"), m)


def test_malformed_json_has_location():
    with pytest.raises(InputError, match=r"x.json:2:\d+: malformed JSON"):
        statefile.loads('{"objects":\n  {,}}', "x.json")


def test_invalid_density_reports_line():
    text = '{\n "objects": {\n  "a": {"kind": "diagonal", "diag": [0.5, 0.5]},\n  "bad": {"kind": "diagonal", "diag": [1.5, -0.5]}\n }\n}'
    with pytest.raises(InputError, match=r"f.json:4: object 'bad'"):
        statefile.loads(text, "f.json").density("bad")


@pytest.mark.parametrize(
    "obj, msg",
    [
        ({"kind": "density", "dim": 2, "entries": [[1, 0]]}, "2x2"),
        ({"kind": "density", "dim": 1, "entries": [["x"]]}, "invalid matrix entry"),
        ({"kind": "diagonal", "diag": []}, "non-empty"),
        ({"kind": "weird"}, "expected kind"),
    ],
)
def test_schema_errors(obj, msg):
    text = json.dumps({"objects": {"o": obj}})
    with pytest.raises(InputError, match=msg):
        statefile.loads(text).density("o")


def test_unknown_name_and_version():
    with pytest.raises(InputError, match="no object named"):
        statefile.loads('{"objects": {}}').density("x")
    with pytest.raises(InputError, match="schema_version"):
        statefile.loads('{"schema_version": 9, "objects": {}}')
    with pytest.raises(InputError, match="cannot read"):
        statefile.load("/nonexistent/file.json")
