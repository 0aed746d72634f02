import json

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from fputwaves import __version__, storage


def test_csv_carries_provenance_and_full_precision():
    frame = pd.DataFrame({"mu": [0.01, 0.02], "omega": [1.0 / 3.0, np.pi]})
    path = storage.write_csv("table.csv", frame, storage.provenance("dispersion", {"c": 1.5}))
    with open(path) as fh:
        header = fh.readline()
    assert header.startswith("# ")
    meta = json.loads(header[2:])
    assert meta == {"command": "dispersion", "params": {"c": 1.5}, "version": __version__}
    back = pd.read_csv(path, comment="#", float_precision="round_trip")
    assert list(back.columns) == ["mu", "omega"]
    assert back["omega"].tolist() == [1.0 / 3.0, np.pi]


def test_json_holds_plain_values():
    payload = {"values": np.arange(3.0), "count": np.int64(4)}
    path = storage.write_json("run.json", payload, storage.provenance("jost", {"mu": 0.05}))
    document = storage.read_json(str(path))
    assert document["provenance"]["command"] == "jost"
    assert document["values"] == [0.0, 1.0, 2.0]
    assert document["count"] == 4


def test_output_dir_is_created(tmp_path):
    storage.set_output_dir(str(tmp_path / "nested" / "out"))
    assert storage.get_output_dir().is_dir()


def test_provenance_names_a_known_command():
    assert storage.provenance("kappa-scan", {"mu": [0.01]})["params"] == {"mu": [0.01]}
    with pytest.raises(ValidationError):
        storage.provenance("serve", {})
