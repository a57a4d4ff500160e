import json

import numpy as np
import pytest

from adapters.storage.file_result_repository import FileResultRepository, format_number
from adapters.storage.weight_table_cache import TABLE_VERSION, WeightTableCache
from core.entities.errors import ConfigError
from core.entities.execution import RunManifest


def _manifest(started_at="2026-01-01T00:00:00"):
    return RunManifest(command="simulate", scenario_hash="abc123", seed=7, code_version="0.1.0",
                       discretization={"n_t": 8}, kernel="covariant", epsilon=0.1,
                       started_at=started_at)


@pytest.mark.parametrize("value, text", [
    (0.1, "0.1"), (np.float64(1e-20), "1e-20"), (True, "true"), (np.bool_(False), "false"),
    (np.int64(3), "3"), (None, ""), ("label", "label"),
])
def test_format_number(value, text):
    assert format_number(value) == text


def test_tables_carry_provenance_without_timestamps(tmp_path):
    first = FileResultRepository(tmp_path / "a", _manifest())
    second = FileResultRepository(tmp_path / "b", _manifest(started_at="2027-06-01T12:00:00"))
    rows = [(0, 0.25, True), (1, 1 / 3, False)]
    path_a = first.write_table("diagnostics", ["k", "value", "flag"], rows)
    path_b = second.write_table("diagnostics", ["k", "value", "flag"], rows)
    lines = path_a.read_text().splitlines()
    assert lines[0].startswith("# ")
    assert json.loads(lines[0][2:])["scenario_hash"] == "abc123"
    assert lines[1] == "k,value,flag"
    assert lines[3] == f"1,{repr(1 / 3)},false"
    assert path_a.read_bytes() == path_b.read_bytes()


def test_table_without_manifest_has_no_comment(tmp_path):
    path = FileResultRepository(tmp_path).write_table("t", ["a"], [(1,)])
    assert path.read_text() == "a\n1\n"


@pytest.mark.parametrize("fmt", ["npz", "json"])
def test_field_container_reads_back(tmp_path, small_grid, make_field, fmt):
    repository = FileResultRepository(tmp_path, _manifest())
    psi = make_field(small_grid)
    field = repository.read_field(repository.write_field("trajectory", psi, fmt=fmt))
    assert field.grid == small_grid
    assert np.array_equal(field.values, psi.values)


def test_unknown_field_format_is_rejected(tmp_path, small_grid, make_field):
    with pytest.raises(ConfigError):
        FileResultRepository(tmp_path).write_field("trajectory", make_field(small_grid), fmt="hdf5")


def test_summary_embeds_manifest_and_outputs_are_listed(tmp_path):
    repository = FileResultRepository(tmp_path)
    manifest_path = repository.write_manifest(_manifest())
    summary_path = repository.write_summary("summary", {"winner": 16})
    records_path = repository.write_json_lines("iterations", [{"k": 0}, {"k": 1}])
    summary = json.loads(summary_path.read_text())
    assert summary["winner"] == 16
    assert summary["manifest"]["seed"] == 7
    assert len(records_path.read_text().splitlines()) == 2
    assert repository.list_outputs() == [manifest_path, summary_path, records_path]


def test_weight_table_persists_between_instances(tmp_path):
    path = tmp_path / "cache" / "weights.json"
    table = WeightTableCache(path)
    assert not table.save()
    table["0.5|1.0|1.5"] = 0.125
    assert table.save()
    assert not table.save()
    reloaded = WeightTableCache(path)
    assert dict(reloaded) == {"0.5|1.0|1.5": 0.125}


def test_corrupted_weight_table_starts_empty(tmp_path):
    path = tmp_path / "weights.json"
    table = WeightTableCache(path)
    table["a"] = 1.0
    table.save()
    document = json.loads(path.read_text())
    document["entries"]["a"] = 2.0
    path.write_text(json.dumps(document))
    assert len(WeightTableCache(path)) == 0
    path.write_text("{not json")
    assert len(WeightTableCache(path)) == 0


def test_foreign_version_weight_table_starts_empty(tmp_path):
    path = tmp_path / "weights.json"
    table = WeightTableCache(path)
    table["a"] = 1.0
    table.save()
    document = json.loads(path.read_text())
    document["version"] = TABLE_VERSION + 1
    path.write_text(json.dumps(document))
    assert len(WeightTableCache(path)) == 0


def test_weight_table_defaults_to_configured_path(tmp_path):
    table = WeightTableCache()
    table["a"] = 1.0
    assert table.save()
    assert (tmp_path / "weights.json").exists()
