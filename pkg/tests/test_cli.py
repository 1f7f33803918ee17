"""Tests for the command implementations and the argument parser."""

import json
import logging
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

import main  # noqa: E402
from src.analysis import FaultClassHypothesis  # noqa: E402
from src.analysis.diagnosis import DiagnosisReport  # noqa: E402
from src.cli import EXIT_FAULT, EXIT_INPUT, EXIT_OK, cmd_diagnose, cmd_dump, cmd_run  # noqa: E402
from src.cli.commands import _check_manifest  # noqa: E402
from src.exceptions import InsufficientDataError, RecordingFormatError  # noqa: E402
from tests.factories import scenario_yaml  # noqa: E402


def report_with(verdict: FaultClassHypothesis, suspect=None) -> DiagnosisReport:
    return DiagnosisReport(
        mode='cross-sensor',
        intervals=12,
        confidence=0.95,
        sensors=[],
        verdict=verdict,
        suspect_sensor=suspect,
        fault_class=verdict.fault_class,
    )


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(scenario_yaml(), encoding='utf-8')
    return path


class TestRunCommand:
    """run: scenario to recording, metrics and manifest."""

    def test_outputs_written(self, scenario, tmp_path):
        out = tmp_path / "out"
        assert cmd_run(scenario, output_dir=out) == EXIT_OK
        assert (out / "recording.ofpl").exists()
        assert (out / "metrics.csv").exists()
        # two intervals are below min_intervals: no report, but the run still succeeds
        assert not (out / "report.json").exists()

        manifest = json.loads((out / "manifest.json").read_text(encoding='utf-8'))
        assert manifest['state'] == 'completed'
        assert manifest['seed'] == 3
        assert manifest['statistics']['steps'] == 20
        assert manifest['statistics']['diagnosis'].startswith("insufficient intervals")
        assert {o['kind'] for o in manifest['outputs']} == {'recording', 'metrics'}

    def test_seed_override(self, scenario, tmp_path):
        out = tmp_path / "out"
        assert cmd_run(scenario, output_dir=out, seed=21) == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text(encoding='utf-8'))
        assert manifest['seed'] == 21

    def test_identical_runs_identical_bytes(self, scenario, tmp_path):
        assert cmd_run(scenario, output_dir=tmp_path / "a") == EXIT_OK
        assert cmd_run(scenario, output_dir=tmp_path / "b") == EXIT_OK
        for name in ("recording.ofpl", "metrics.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_workers_from_app_config(self, scenario, tmp_path):
        assert cmd_run(scenario, output_dir=tmp_path / "a") == EXIT_OK
        config = {'runtime': {'workers': 2}}
        assert cmd_run(scenario, output_dir=tmp_path / "b", app_config=config) == EXIT_OK
        assert (tmp_path / "a" / "recording.ofpl").read_bytes() == (tmp_path / "b" / "recording.ofpl").read_bytes()

    def test_invalid_scenario(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text(scenario_yaml().replace("seed: 3", "seed: -3"), encoding='utf-8')
        assert cmd_run(path, output_dir=tmp_path / "out") == EXIT_INPUT
        assert "bad.yaml:3:" in capsys.readouterr().err
        assert not (tmp_path / "out").exists()

    def test_missing_scenario(self, tmp_path):
        assert cmd_run(tmp_path / "absent.yaml", output_dir=tmp_path / "out") == EXIT_INPUT


class TestDiagnoseCommand:
    """diagnose: exit status follows the verdict."""

    def test_fault_verdict_exits_3(self, tmp_path, mocker, capsys):
        mocker.patch('src.cli.commands.read_recording', return_value=object())
        mocker.patch(
            'src.cli.commands.analyse',
            return_value=([], report_with(FaultClassHypothesis.BLIND_SPOT, suspect=1)),
        )
        assert cmd_diagnose(tmp_path / "run.ofpl", output_dir=tmp_path) == EXIT_FAULT
        assert "sensor 1, fault class 3" in capsys.readouterr().out
        report = json.loads((tmp_path / "report.json").read_text(encoding='utf-8'))
        assert report['verdict'] == "pollution/blind spot"

    def test_no_fault_exits_0(self, tmp_path, mocker):
        mocker.patch('src.cli.commands.read_recording', return_value=object())
        mocker.patch('src.cli.commands.analyse', return_value=([], report_with(FaultClassHypothesis.NO_FAULT)))
        assert cmd_diagnose(tmp_path / "run.ofpl", output_dir=tmp_path) == EXIT_OK

    def test_inconclusive_is_not_a_fault(self, tmp_path, mocker):
        mocker.patch('src.cli.commands.read_recording', return_value=object())
        mocker.patch('src.cli.commands.analyse', return_value=([], report_with(FaultClassHypothesis.INCONCLUSIVE)))
        assert cmd_diagnose(tmp_path / "run.ofpl", output_dir=tmp_path) == EXIT_OK

    def test_reference_recording_is_read(self, tmp_path, mocker):
        reader = mocker.patch('src.cli.commands.read_recording', return_value=object())
        analyse = mocker.patch('src.cli.commands.analyse', return_value=([], report_with(FaultClassHypothesis.NO_FAULT)))
        cmd_diagnose(tmp_path / "run.ofpl", baseline=str(tmp_path / "ref.ofpl"), output_dir=tmp_path)
        assert reader.call_count == 2
        assert analyse.call_args[0][1] is reader.return_value

    def test_corrupt_recording(self, tmp_path, mocker):
        mocker.patch('src.cli.commands.read_recording', side_effect=RecordingFormatError("bad magic"))
        assert cmd_diagnose(tmp_path / "run.ofpl") == EXIT_INPUT

    def test_insufficient_intervals(self, tmp_path, mocker):
        mocker.patch('src.cli.commands.read_recording', return_value=object())
        mocker.patch('src.cli.commands.analyse', side_effect=InsufficientDataError("insufficient intervals: 2 < 10"))
        assert cmd_diagnose(tmp_path / "run.ofpl") == EXIT_INPUT

    def test_missing_file(self, tmp_path):
        assert cmd_diagnose(tmp_path / "absent.ofpl") == EXIT_INPUT

    def test_manifest_checked_before_diagnosis(self, scenario, tmp_path, mocker, caplog):
        out = tmp_path / "out"
        assert cmd_run(scenario, output_dir=out) == EXIT_OK
        recording = out / "recording.ofpl"
        assert _check_manifest(recording, None) == []

        (out / "metrics.csv").write_text("edited\n", encoding='utf-8')
        assert _check_manifest(recording, None) == ["metrics.csv"]

        with recording.open('ab') as f:
            f.write(b"\0")
        mocker.patch('src.cli.commands.read_recording', return_value=object())
        mocker.patch('src.cli.commands.analyse', return_value=([], report_with(FaultClassHypothesis.NO_FAULT)))
        with caplog.at_level(logging.WARNING, logger='src.cli.commands'):
            assert cmd_diagnose(recording, output_dir=tmp_path / "diag") == EXIT_OK
        assert "differs from the recording inventoried" in caplog.text

    def test_without_manifest(self, tmp_path):
        assert _check_manifest(tmp_path / "run.ofpl", None) == []


class TestDumpCommand:
    """dump: recording to JSON lines."""

    def test_dump_to_file(self, scenario, tmp_path):
        cmd_run(scenario, output_dir=tmp_path / "run")
        target = tmp_path / "dump.jsonl"
        assert cmd_dump(tmp_path / "run" / "recording.ofpl", target) == EXIT_OK
        lines = target.read_text(encoding='utf-8').splitlines()
        assert len(lines) == 21
        assert json.loads(lines[0])['frame'] == 'header'
        assert json.loads(lines[-1])['step'] == 19

    def test_dump_to_stdout(self, scenario, tmp_path, capsys):
        cmd_run(scenario, output_dir=tmp_path / "run")
        capsys.readouterr()
        assert cmd_dump(tmp_path / "run" / "recording.ofpl") == EXIT_OK
        assert len(capsys.readouterr().out.splitlines()) == 21

    def test_not_a_recording(self, tmp_path):
        path = tmp_path / "notes.txt"
        path.write_text("hello, this is not a recording", encoding='utf-8')
        assert cmd_dump(path, tmp_path / "dump.jsonl") == EXIT_INPUT
        assert not (tmp_path / "dump.jsonl").exists()


class TestMain:
    """Argument parsing and dispatch."""

    def test_parse_run(self):
        args = main.parse_arguments(['run', 'config/scenarios/highway.yaml', '--seed', '4', '--out', 'data/x'])
        assert args.command == 'run'
        assert args.scenario == Path('config/scenarios/highway.yaml')
        assert args.seed == 4
        assert args.out == Path('data/x')

    def test_diagnose_defaults_to_cross_sensor(self):
        args = main.parse_arguments(['diagnose', 'run.ofpl'])
        assert args.baseline == 'cross-sensor'

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main.parse_arguments([])
        assert excinfo.value.code == EXIT_INPUT

    def test_dispatch(self, tmp_path, mocker):
        mocker.patch('main.setup_logger')
        dump = mocker.patch('main.cmd_dump', return_value=EXIT_OK)
        status = main.main(['--config', str(tmp_path / 'none.yaml'), '--log-level', 'DEBUG', 'dump', 'run.ofpl'])
        assert status == EXIT_OK
        dump.assert_called_once_with(Path('run.ofpl'), output=None)
        assert main.setup_logger.call_args.kwargs['log_level'] == 'DEBUG'
