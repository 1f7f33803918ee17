"""
Command implementations behind main.py.

Each command returns a process exit status: 0 ok, 2 usage or input error,
3 fault detected (diagnose only), 1 unexpected failure.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from src.analysis.diagnosis import DiagnosisReport, diagnose
from src.analysis.metrics import BinSpec, IntervalStats, interval_rows, recording_metrics
from src.exceptions import ConfigError, InsufficientDataError, RecordingFormatError
from src.manifest.manager import ManifestManager
from src.simulation.config import ScenarioConfig, load_scenario
from src.simulation.runner import Recording, RecordingHeader, ScenarioRunner
from src.storage.csv_storage import CSVStorage
from src.storage.json_storage import JSONLinesStorage, JSONStorage
from src.storage.recording import RecordingWriter, dump_records, read_recording
from src.utils.logger import RunLogger

logger = logging.getLogger(__name__)
run_logger = RunLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_FAULT = 3

CROSS_SENSOR = "cross-sensor"


def _storage_config(app_config: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    return (app_config or {}).get('storage', {})


def _report_error(error: Exception) -> None:
    logger.error(f"{error}")
    print(f"error: {error}", file=sys.stderr)


def _scenario_of(recording: Recording) -> ScenarioConfig:
    try:
        return recording.header.scenario_config()
    except ValidationError as e:
        raise RecordingFormatError(f"recording header holds an invalid scenario: {e}") from e


def analyse(
    recording: Recording,
    reference: Optional[Recording] = None
) -> Tuple[List[IntervalStats], DiagnosisReport]:
    """
    Interval statistics and diagnosis of a recording.

    Raises:
        InsufficientDataError: Too few intervals or usable sensors
    """
    config = _scenario_of(recording)
    bin_spec = BinSpec.for_scenario(config)
    stats = recording_metrics(recording, bin_spec)
    reference_stats = None
    if reference is not None:
        reference_stats = recording_metrics(reference, bin_spec, config.analysed_sensors())
    report = diagnose(
        stats,
        config.sensor_metas(),
        config.build_map(),
        bin_spec,
        analysed=config.analysed_sensors(),
        reference=reference_stats,
        confidence=config.analysis.confidence,
        min_intervals=config.analysis.min_intervals,
    )
    run_logger.log_diagnosis(report.verdict.value, report.suspect_sensor)
    return stats, report


def summary_rows(report: DiagnosisReport) -> List[Dict[str, Any]]:
    """Whole-run CI rows of the metrics table (interval 'all' and 'baseline')."""
    rows: List[Dict[str, Any]] = []
    for sensor in report.sensors:
        for comparison in sensor.comparisons:
            for label, ci in (('all', comparison.interval), ('baseline', comparison.baseline)):
                if ci is None:
                    continue
                rows.append({
                    'interval': label,
                    'sensor_id': sensor.sensor_id,
                    'metric': comparison.metric,
                    'mean': ci.mean,
                    'ci_low': ci.low,
                    'ci_high': ci.high,
                    'samples': ci.samples,
                })
    for item in report.bins:
        for label, ci in (('all', item.interval), ('reference', item.reference)):
            if ci is None:
                continue
            rows.append({
                'interval': label,
                'bin_id': item.bin_id,
                'metric': 'p_exists',
                'mean': ci.mean,
                'ci_low': ci.low,
                'ci_high': ci.high,
                'samples': ci.samples,
            })
    return rows


def _write_analysis(
    output_dir: Path,
    stats: List[IntervalStats],
    report: Optional[DiagnosisReport],
    app_config: Optional[Dict[str, Any]]
) -> List[Tuple[Path, str]]:
    storage = _storage_config(app_config)
    files = storage.get('files', {})
    rows = interval_rows(stats) + (summary_rows(report) if report is not None else [])
    metrics = CSVStorage(output_dir, storage.get('csv', {}))
    written = [(metrics.save(rows, files.get('metrics', 'metrics.csv')), 'metrics')]
    if report is not None:
        documents = JSONStorage(output_dir, storage.get('json', {}))
        written.append((documents.save(report.to_dict(), files.get('report', 'report.json')), 'report'))
    return written


def cmd_run(
    config_path: Path,
    output_dir: Optional[Path] = None,
    seed: Optional[int] = None,
    app_config: Optional[Dict[str, Any]] = None
) -> int:
    """
    Run a scenario and write recording, metrics, report and manifest.

    Args:
        config_path: Scenario YAML file
        output_dir: Output directory; <storage.output_dir>/<scenario name> when None
        seed: Overrides the scenario seed
        app_config: Application configuration

    Returns:
        Exit status
    """
    try:
        config = load_scenario(config_path, seed=seed)
        workers = (app_config or {}).get('runtime', {}).get('workers', 1)
        runner = ScenarioRunner(config, workers=workers)
    except ConfigError as e:
        _report_error(e)
        return EXIT_INPUT

    storage = _storage_config(app_config)
    output_dir = Path(output_dir) if output_dir else Path(storage.get('output_dir', 'data')) / config.name
    files = storage.get('files', {})
    header = RecordingHeader.for_config(config)
    manifest = ManifestManager(output_dir, files.get('manifest', 'manifest.json'), storage.get('json', {}))
    manifest.start_run('run', scenario=config.name, config_hash=header.config_hash, seed=config.seed)

    try:
        with RecordingWriter(output_dir / files.get('recording', 'recording.ofpl'), header) as writer:
            runner.sink = writer
            recording = runner.run()
        manifest.register_output(writer.path, 'recording')

        report = None
        try:
            stats, report = analyse(recording)
        except InsufficientDataError as e:
            logger.warning(f"Diagnosis skipped: {e}")
            stats = recording_metrics(recording)
            manifest.update_statistics({'diagnosis': str(e)})

        for path, kind in _write_analysis(output_dir, stats, report, app_config):
            manifest.register_output(path, kind)

        manifest.update_statistics({
            'steps': len(recording),
            'intervals': len(stats),
            'diagnostics': sum(len(r.diagnostics) for r in recording.steps),
            'verdict': report.verdict.value if report is not None else None,
        })
        manifest.complete_run(success=True)
        return EXIT_OK

    except Exception as e:
        run_logger.log_error(e, "Run failed")
        manifest.complete_run(success=False, error=str(e))
        return EXIT_FAILURE


def _check_manifest(recording_path: Path, app_config: Optional[Dict[str, Any]]) -> List[str]:
    """
    Compare the outputs next to a recording against the manifest of its run.

    A missing or unreadable manifest is not an error; diagnose also works on
    recordings copied out of their run directory.

    Returns:
        Names of inventoried outputs that are missing or changed
    """
    if not Path(recording_path).parent.is_dir():
        return []
    storage = _storage_config(app_config)
    manager = ManifestManager(
        Path(recording_path).parent, storage.get('files', {}).get('manifest', 'manifest.json'), storage.get('json', {})
    )
    if not manager.manifest_file.exists():
        logger.debug(f"No manifest next to {recording_path}")
        return []
    try:
        manager.load()
    except (RecordingFormatError, ValidationError, ValueError, OSError) as e:
        logger.warning(f"Ignoring unreadable manifest {manager.manifest_file}: {e}")
        return []

    stale = manager.verify()
    if Path(recording_path).name in stale:
        logger.warning(f"{recording_path} differs from the recording inventoried in {manager.manifest_file}")
    elif stale:
        logger.info(f"Outputs changed since the run: {', '.join(stale)}")
    return stale


def cmd_diagnose(
    recording_path: Path,
    baseline: str = CROSS_SENSOR,
    output_dir: Optional[Path] = None,
    app_config: Optional[Dict[str, Any]] = None
) -> int:
    """
    Re-run the analysis of an existing recording.

    Args:
        recording_path: Recording to diagnose
        baseline: 'cross-sensor' or the path of a no-fault reference recording
        output_dir: Where report and metrics go; next to the recording when None
        app_config: Application configuration

    Returns:
        0, or 3 when the verdict names a fault class
    """
    _check_manifest(recording_path, app_config)
    try:
        recording = read_recording(recording_path)
        reference = None if baseline == CROSS_SENSOR else read_recording(Path(baseline))
        stats, report = analyse(recording, reference)
    except (RecordingFormatError, InsufficientDataError, OSError) as e:
        _report_error(e)
        return EXIT_INPUT

    output_dir = Path(output_dir) if output_dir else Path(recording_path).parent
    try:
        _write_analysis(output_dir, stats, report, app_config)
    except Exception as e:
        run_logger.log_error(e, "Writing diagnosis failed")
        return EXIT_FAILURE

    print(f"verdict: {report.verdict.value}" + (
        f" (sensor {report.suspect_sensor}, fault class {report.fault_class})" if report.is_fault else ""
    ))
    return EXIT_FAULT if report.is_fault else EXIT_OK


def cmd_dump(recording_path: Path, output: Optional[Path] = None) -> int:
    """Convert a recording to JSON lines: header first, then one line per step."""
    try:
        if output is None:
            JSONLinesStorage(Path('.')).write_stdout(dump_records(recording_path))
        else:
            output = Path(output)
            JSONLinesStorage(output.parent).save(dump_records(recording_path), output.name)
    except (RecordingFormatError, OSError) as e:
        _report_error(e)
        return EXIT_INPUT
    return EXIT_OK
