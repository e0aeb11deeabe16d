"""End-to-end tests of the command line and its file formats."""

import csv
import io
import json

import numpy as np
import pytest

from cli.commands import run
from cli.reports import RunConfig, load_run_config, render_csv, strip_metadata
from cli.statefile import load_state, parse_state, save_state
from entanglement.space import harmonic_space
from entanglement.states import DensityOperator, random_density, random_pure_state
from shared.constants import ExitCode, OutputFormat
from shared.errors import InvalidArgumentError, StateFileError

pytestmark = pytest.mark.integration


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def matrix_payload(matrix):
    return {"dims": [2, 2], "matrix": np.stack([matrix.real, np.zeros_like(matrix.real)], axis=-1).tolist()}


def error_of(err):
    return json.loads(err.strip().splitlines()[-1])


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def bell_file(tmp_path, capsys):
    path = tmp_path / "bell.json"
    code, _, _ = invoke(capsys, "save-state", "--builtin", "bell", "--cutoff", "2", "2", "--out", str(path))
    assert code == ExitCode.SUCCESS
    return path


@pytest.fixture
def werner_file(tmp_path, werner, qubits):
    path = tmp_path / "werner.json"
    save_state(path, werner(0.75), qubits)
    return path


class TestStateFiles:
    def test_round_trip_is_bit_exact(self, tmp_path, qutrits, rng):
        rho = random_density(qutrits, rng)
        path = save_state(tmp_path / "rho.json", rho, qutrits)
        loaded = load_state(path)
        assert loaded.dims == (3, 3)
        assert np.array_equal(loaded.state.matrix, rho.matrix)

    def test_vector_round_trip_is_bit_exact(self, tmp_path, qutrits, rng):
        for _ in range(200):
            psi = random_pure_state(qutrits, rng)
            loaded = load_state(save_state(tmp_path / "psi.json", psi, qutrits))
            assert loaded.is_pure
            assert np.array_equal(loaded.state.amplitudes, psi.amplitudes)

    def test_non_hermitian_rejected(self):
        matrix = np.eye(4) / 4
        matrix[0, 1] = 0.1
        payload = matrix_payload(matrix)
        with pytest.raises(StateFileError, match="not Hermitian"):
            parse_state(payload)

    def test_trace_rejected(self):
        payload = matrix_payload(np.eye(4) / 2)
        with pytest.raises(StateFileError, match="trace"):
            parse_state(payload)

    def test_small_trace_error_renormalised(self):
        payload = matrix_payload(np.eye(4) / 4 * (1 + 5e-9))
        loaded = parse_state(payload)
        assert np.trace(loaded.state.matrix).real == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("payload", [{}, {"dims": [2]}, {"dims": [2, 2]}, {"dims": [2, 2], "vector": [[1, 0]]}])
    def test_malformed_documents(self, payload):
        with pytest.raises(StateFileError):
            parse_state(payload)

    def test_missing_file(self, tmp_path):
        with pytest.raises(StateFileError):
            load_state(tmp_path / "absent.json")


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.cutoff == (24, 24)
        assert config.budget == 3.0 and config.eps == 0.2
        assert config.format is OutputFormat.CSV
        assert config.space().dims == (24, 24)

    def test_file_then_overrides(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"eps": 0.5, "seed": 3}))
        config = load_run_config({"seed": 11, "beta": None}, path=str(path))
        assert config.eps == 0.5
        assert config.seed == 11
        assert config.beta == 1.0

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            load_run_config({"eps": -1.0}, path="")
        with pytest.raises(InvalidArgumentError):
            load_run_config({"cutoff": (1, 4)}, path="")

    def test_explicit_spectra(self):
        config = RunConfig(cutoff=(2, 3), levels_a=[0.0, 0.5])
        space = config.space()
        assert space.spec_a.levels == (0.0, 0.5)
        assert space.spec_b.levels == (0.0, 1.0, 2.0)

    def test_csv_has_header_and_blank_missing_cells(self):
        text = render_csv(("index", "fannes_bound_bits"), [(0, None), (1, 0.25)])
        assert text.splitlines() == ["index,fannes_bound_bits", "0,", "1,0.25"]


class TestDemoExample1:
    def test_single_row(self, capsys):
        code, out, _ = invoke(capsys, "demo-example1", "--kmin", "4", "--kmax", "4")
        assert code == ExitCode.SUCCESS
        assert out.splitlines()[0] == "k,delta_k,E_bits,trace_distance,mean_energy"
        (row,) = csv_rows(out)
        assert int(row["k"]) == 4
        assert float(row["E_bits"]) == pytest.approx(2.0)

    def test_k2_edge_case(self, capsys):
        code, out, _ = invoke(capsys, "demo-example1", "--kmin", "2", "--kmax", "2")
        (row,) = csv_rows(out)
        assert code == ExitCode.SUCCESS
        assert float(row["E_bits"]) == pytest.approx(1.0)
        assert float(row["trace_distance"]) == pytest.approx(2.0)

    def test_scan_is_monotone(self, capsys):
        code, out, _ = invoke(capsys, "demo-example1", "--kmin", "16", "--kmax", "4096")
        rows = csv_rows(out)
        assert code == ExitCode.SUCCESS
        entropies = [float(r["E_bits"]) for r in rows]
        energies = [float(r["mean_energy"]) for r in rows]
        assert all(b < a for a, b in zip(entropies, entropies[1:]))
        assert all(b > a for a, b in zip(energies, energies[1:]))

    def test_json_output_to_file(self, capsys, tmp_path):
        out_path = tmp_path / "reports" / "example1.json"
        code, out, _ = invoke(
            capsys, "demo-example1", "--kmin", "4", "--kmax", "8", "--format", "json", "--out", str(out_path)
        )
        assert code == ExitCode.SUCCESS and out == ""
        document = json.loads(out_path.read_text())
        assert [row["k"] for row in document["report"]] == [4, 8]
        assert "generated_at" in document["metadata"]

    def test_invalid_kmin(self, capsys):
        code, _, err = invoke(capsys, "demo-example1", "--kmin", "1", "--kmax", "4")
        assert code == ExitCode.IO_ERROR
        assert error_of(err)["error_code"] == "INVALID_ARGUMENT"


class TestDemoNeighbor:
    def test_ground_state_certificate(self, capsys):
        code, out, _ = invoke(capsys, "demo-neighbor", "--builtin", "ground", "--eps", "0.2", "--budget", "3")
        assert code == ExitCode.SUCCESS
        certificate = json.loads(out)["report"]
        assert certificate["k"] == 20
        assert certificate["trace_distance"] == pytest.approx(0.1)
        assert certificate["mean_energy"] == pytest.approx(2.05)
        assert certificate["npt_witness"] == pytest.approx(-0.025)

    def test_large_radius(self, capsys):
        code, out, _ = invoke(capsys, "demo-neighbor", "--eps", "2.5", "--cutoff", "6", "6")
        assert code == ExitCode.SUCCESS
        assert json.loads(out)["report"]["branch"] == "diameter"

    def test_config_file_supplies_defaults(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"eps": 2.5, "cutoff": [6, 6]}))
        code, out, _ = invoke(capsys, "demo-neighbor", "--config", str(path))
        assert code == ExitCode.SUCCESS
        assert json.loads(out)["report"]["branch"] == "diameter"

    def test_budget_violation(self, capsys):
        code, out, err = invoke(capsys, "demo-neighbor", "--builtin", "bell", "--budget", "0.5", "--cutoff", "6", "6")
        assert code == ExitCode.BUDGET_VIOLATION
        assert out == ""
        assert "S_M" in error_of(err)["error"]

    def test_construction_failure(self, capsys):
        code, _, err = invoke(capsys, "demo-neighbor", "--cutoff", "5", "5", "--npt-tol", "0.4")
        assert code == ExitCode.CONSTRUCTION_FAILED
        assert error_of(err)["scan_log"]

    def test_state_file_input(self, capsys, bell_file):
        code, _, _ = invoke(capsys, "demo-neighbor", "--state", str(bell_file), "--eps", "2.5")
        assert code == ExitCode.SUCCESS


class TestMeasure:
    def test_bell_entropy_of_entanglement(self, capsys, bell_file):
        code, out, _ = invoke(capsys, "measure", "--state", str(bell_file), "--which", "E")
        report = json.loads(out)["report"]
        assert code == ExitCode.SUCCESS
        assert report["value"] == pytest.approx(1.0)
        assert report["diagnostics"]["certificate"] == "exact"

    def test_bell_relative_entropy(self, capsys, bell_file):
        code, out, _ = invoke(capsys, "measure", "--state", str(bell_file), "--which", "ER", "--tol", "1e-4")
        report = json.loads(out)["report"]
        assert code == ExitCode.SUCCESS
        assert report["value"] == pytest.approx(1.0, abs=5e-3)
        assert report["diagnostics"]["certificate"] == "upper-bound(heuristic-LMO)"
        assert report["diagnostics"]["seed"] == 0

    def test_product_formation(self, capsys, tmp_path):
        path = tmp_path / "ground.json"
        invoke(capsys, "save-state", "--builtin", "ground", "--cutoff", "3", "3", "--out", str(path))
        code, out, _ = invoke(capsys, "measure", "--state", str(path), "--which", "EF")
        assert code == ExitCode.SUCCESS
        assert json.loads(out)["report"]["value"] <= 1e-3

    def test_entropy_of_mixed_state_is_a_dispatch_error(self, capsys, werner_file):
        code, out, err = invoke(capsys, "measure", "--state", str(werner_file), "--which", "E")
        assert code == ExitCode.DISPATCH_MISUSE
        assert out == ""
        message = error_of(err)["error"]
        assert "EF" in message and "ER" in message

    def test_formation_of_mixed_state(self, capsys, werner_file):
        code, out, _ = invoke(capsys, "measure", "--state", str(werner_file), "--which", "EF", "--restarts", "2")
        assert code == ExitCode.SUCCESS
        assert json.loads(out)["report"]["value"] == pytest.approx(0.4989, abs=1e-2)

    def test_cap_exceeded(self, capsys):
        code, _, err = invoke(capsys, "measure", "--builtin", "bell", "--which", "ER")
        assert code == ExitCode.CAP_EXCEEDED
        assert "OPTIMIZATION_CAP" in error_of(err)["error"]

    def test_invalid_state_file(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(matrix_payload(np.eye(4) / 2)))
        code, _, err = invoke(capsys, "measure", "--state", str(path), "--which", "S")
        assert code == ExitCode.IO_ERROR
        assert "trace" in error_of(err)["error"]

    def test_reports_are_reproducible(self, capsys, werner_file):
        argv = ("measure", "--state", str(werner_file), "--which", "ER", "--tol", "1e-3", "--seed", "4")
        _, first, _ = invoke(capsys, *argv, "--no-metadata")
        _, second, _ = invoke(capsys, *argv, "--no-metadata")
        assert first == second
        _, third, _ = invoke(capsys, *argv)
        assert strip_metadata(third) == json.loads(first)


class TestContinuity:
    def test_prop3_zero_perturbation(self, capsys):
        code, out, _ = invoke(capsys, "continuity", "--mode", "prop3", "--scales", "0")
        (row,) = csv_rows(out)
        assert code == ExitCode.SUCCESS
        assert float(row["gap_bits"]) == pytest.approx(0.0, abs=1e-12)

    def test_prop4_bell(self, capsys):
        code, out, _ = invoke(capsys, "continuity", "--mode", "prop4", "--builtin", "bell")
        rows = csv_rows(out)
        assert code == ExitCode.SUCCESS
        assert list(rows[0]) == ["index", "trace_distance", "gap_bits", "fannes_bound_bits"]
        gaps = [float(r["gap_bits"]) for r in rows]
        assert len(gaps) == 6
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        for row in rows:
            if row["fannes_bound_bits"]:
                assert float(row["gap_bits"]) <= float(row["fannes_bound_bits"])

    def test_prop8_bell_identity_mixtures(self, capsys):
        code, out, _ = invoke(
            capsys, "continuity", "--mode", "prop8", "--cutoff", "2", "2", "--scales", "0.2", "0.1", "0.05",
            "--tol", "1e-4",
        )
        gaps = [float(r["gap_bits"]) for r in csv_rows(out)]
        assert code == ExitCode.SUCCESS
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_prop8_cap(self, capsys):
        code, _, err = invoke(capsys, "continuity", "--mode", "prop8")
        assert code == ExitCode.CAP_EXCEEDED
        assert "OPTIMIZATION_CAP" in error_of(err)["error"]

    def test_prop9_tensor_power_cap(self, capsys):
        code, _, err = invoke(capsys, "continuity", "--mode", "prop9", "--cutoff", "6", "6")
        assert code == ExitCode.CAP_EXCEEDED
        assert "TENSOR_POWER_CAP" in error_of(err)["error"]

    def test_mixed_state_rejected_for_prop3(self, capsys, werner_file):
        code, _, _ = invoke(capsys, "continuity", "--mode", "prop3", "--state", str(werner_file))
        assert code == ExitCode.DISPATCH_MISUSE


class TestTruncation:
    def test_example1_converges(self, capsys):
        code, out, _ = invoke(capsys, "truncation", "--cutoff", "9", "9", "--cutoffs", "1", "5", "9")
        rows = csv_rows(out)
        assert code == ExitCode.SUCCESS
        assert list(rows[0]) == ["cutoff", "retained_weight", "trace_distance", "E_bits"]
        assert float(rows[0]["E_bits"]) == pytest.approx(0.0, abs=1e-12)
        assert float(rows[-1]["retained_weight"]) == pytest.approx(1.0)


class TestSaveState:
    def test_gibbs_file_loads_back(self, capsys, tmp_path):
        path = tmp_path / "gibbs.json"
        code, _, _ = invoke(capsys, "save-state", "--builtin", "gibbs", "--beta", "0.5", "--cutoff", "3", "3", "--out", str(path))
        loaded = load_state(path)
        assert code == ExitCode.SUCCESS
        assert isinstance(loaded.state, DensityOperator)
        assert loaded.dims == (3, 3)

    def test_requires_output_path(self, capsys):
        code, _, _ = invoke(capsys, "save-state", "--builtin", "bell")
        assert code == ExitCode.IO_ERROR
