"""Subcommand handlers. Each returns the process exit status."""
import argparse
import math
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from cli.manifest import RunManifest
from cli.parser import parse_angle_set, parse_state_spec
from config.device import DeviceConfig, load_config
from config.logging_config import get_logger
from config.settings import get_default_config_path
from quantum.bell import BellLabel, confirm_mixture_baseline, confirm_projective, prepare_bell
from quantum.states import BASIS_LABELS, TwoQubitState
from services.chsh_harness import ChshHarness, chsh_scan
from services.readout import ExtractionMethod, peak_report
from services.scheduler import BudgetPolicy, dispersive_report, full_budget
from services.spectrometer import (
    ClosedFormVariant,
    Engine,
    Spectrometer,
    make_grid,
    normalize,
    pairwise_deviations,
    pulls,
)
from utils.exceptions import ConfigurationError, UsageError
from utils.trace_io import write_json, write_landscape, write_text, write_trace
from utils.units import to_mhz

EXIT_VIOLATED = 0
EXIT_NOT_VIOLATED = 1
EXIT_ERROR = 2


def _format_probs(probs: Sequence[float]) -> str:
    return "(" + ", ".join(f"{p:.6f}" for p in probs) + ")"


def amplitude_table(state: TwoQubitState) -> str:
    lines = [f"{'basis':<7}{'re':>12}{'im':>12}{'|amp|^2':>12}"]
    for label, amp in zip(BASIS_LABELS, state.amps):
        lines.append(f"|{label}>  {amp.real:>12.6f}{amp.imag:>12.6f}{abs(amp) ** 2:>12.6f}")
    return "\n".join(lines)


def relative_phase(state: TwoQubitState, label: BellLabel) -> float:
    """Phase of the second populated amplitude relative to the first, in units of pi, in (-1, 1]."""
    first, second = (0, 3) if label in (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS) else (1, 2)
    phase = float(np.angle(state.amps[second] / state.amps[first])) / math.pi
    if phase <= -1 + 1e-12:
        phase += 2.0
    return phase if abs(phase) > 1e-12 else 0.0


class CommandRunner:
    def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
        self.args = args
        self.argv = list(argv)
        self.output_dir = Path(args.output_dir)
        self.logger = get_logger("cli.commands")

    def run(self) -> int:
        handlers = {
            "prepare": self.cmd_prepare,
            "spectrum": self.cmd_spectrum,
            "chsh": self.cmd_chsh,
            "schedule": self.cmd_schedule,
            "scan": self.cmd_scan,
        }
        self.logger.info(f"Running {self.args.command}", extra={"run_details": {"argv": self.argv}})
        return handlers[self.args.command]()

    def _load_config(self) -> Tuple[str, DeviceConfig]:
        path = self.args.config or get_default_config_path()
        return path, load_config(path)

    def _manifest(self, config_path: str = None, cfg: DeviceConfig = None, **parameters) -> RunManifest:
        if cfg is not None:
            parameters["device"] = cfg.model_dump()
            parameters["dispersive"] = cfg.dispersive_params().model_dump()
        return RunManifest(command=self.args.command, argv=self.argv, config_path=config_path, parameters=parameters)

    def _finish(self, manifest: RunManifest, text: str) -> None:
        manifest_path = manifest.write(self.output_dir)
        print(text)
        self.logger.info(
            f"Wrote {len(manifest.outputs)} artifacts",
            extra={"run_details": {"manifest": str(manifest_path), "outputs": manifest.outputs}}
        )

    def cmd_prepare(self) -> int:
        try:
            label = BellLabel.parse(self.args.bell)
        except ValueError as e:
            raise UsageError(str(e)) from e

        state = prepare_bell(label)
        direct, rotated = confirm_projective(state)
        phase = relative_phase(state, label)
        lines = [
            f"Prepared Bell state {label.value}",
            "",
            amplitude_table(state),
            "",
            f"relative phase      : {phase:+.4f} pi",
            f"direct probabilities: {_format_probs(direct)}",
            f"after ry(pi/4)      : {_format_probs(rotated)}",
        ]
        record = {"label": label.value, "amplitudes": state.amps, "relative_phase_pi": phase,
                  "direct": direct, "rotated": rotated}

        if self.args.mixture_baseline:
            mixture_direct, mixture_rotated = confirm_mixture_baseline()
            distinguished = not np.allclose(rotated, mixture_rotated, atol=1e-9)
            lines += [
                "",
                "equal |00>/|11> mixture",
                f"direct probabilities: {_format_probs(mixture_direct)}",
                f"after ry(pi/4)      : {_format_probs(mixture_rotated)}",
                f"distinguished from the Bell state: {'yes' if distinguished else 'no'}",
            ]
            record["mixture"] = {"direct": mixture_direct, "rotated": mixture_rotated,
                                 "distinguished": distinguished}

        text = "\n".join(lines)
        manifest = self._manifest(bell=label.value, mixture_baseline=self.args.mixture_baseline)
        manifest.add_output(write_text(self.output_dir / "prepare.txt", text))
        manifest.add_output(write_json(self.output_dir / "prepare.json", record))
        self._finish(manifest, text)
        return 0

    def cmd_spectrum(self) -> int:
        config_path, cfg = self._load_config()
        cfg.dispersive_ratios()
        params = cfg.dispersive_params()
        state = parse_state_spec(self.args.state)
        try:
            grid = make_grid(self.args.grid_min, self.args.grid_max, self.args.points)
        except ConfigurationError as e:
            raise UsageError(f"Invalid grid: {e}") from e

        spectrometer = Spectrometer(
            params, grid, workers=self.args.workers,
            variant=ClosedFormVariant(self.args.a_term, self.args.odd_sign),
            n_max=self.args.n_max,
        )
        engines: List[str] = [engine.value for engine in Engine] if self.args.compare else [self.args.engine]
        manifest = self._manifest(
            config_path, cfg, state=self.args.state, engines=engines,
            grid={"min_mhz": self.args.grid_min, "max_mhz": self.args.grid_max, "points": self.args.points},
            a_term=self.args.a_term, odd_sign=self.args.odd_sign, n_max=self.args.n_max,
        )

        traces = {}
        lines = []
        for engine in engines:
            trace = spectrometer.trace(state, engine)
            traces[engine] = trace
            normalized = normalize(trace)
            manifest.add_output(write_trace(self.output_dir / f"spectrum_{engine}.csv", normalized.grid, normalized.values))
            peaks = ", ".join(f"{position} (FWHM {width:.3f})" for position, width in peak_report(normalized).items())
            lines.append(f"{engine:<12} peaks at detuning/2pi MHz: {peaks}")

        if self.args.compare:
            deviations = pairwise_deviations(traces)
            lines.append("")
            lines += [f"max normalized deviation {pair}: {value:.3e}" for pair, value in deviations.items()]
            manifest.parameters["deviations"] = deviations

        expected = ", ".join(f"|{label}> {to_mhz(shift):+.3f}" for label, shift in pulls(params).items())
        text = "\n".join([f"expected pulls (2pi MHz): {expected}", ""] + lines)
        self._finish(manifest, text)
        return 0

    def cmd_chsh(self) -> int:
        config_path, cfg = self._load_config()
        angles = parse_angle_set(self.args.preset, self.args.angles)
        method = ExtractionMethod.parse(self.args.method)
        harness = ChshHarness(cfg, method=method, engine=self.args.engine, workers=self.args.workers)
        report = harness.run(angles)

        manifest = self._manifest(config_path, cfg, angles=angles.as_tuple(), method=method.value,
                                  engine=self.args.engine, preset=self.args.preset)
        if method is not ExtractionMethod.IDEAL:
            sections = [f"## {key}\n{table.to_text()}" for key, table in harness.peak_tables(angles).items()]
            manifest.add_output(write_text(self.output_dir / "chsh_peaks.txt", "\n\n".join(sections)))
        manifest.add_output(write_text(self.output_dir / "chsh_report.txt", report.to_text()))
        manifest.add_output(write_json(self.output_dir / "chsh_report.json", report.to_record()))
        self._finish(manifest, report.to_text())
        return EXIT_VIOLATED if report.violated else EXIT_NOT_VIOLATED

    def cmd_schedule(self) -> int:
        config_path, cfg = self._load_config()
        policy = BudgetPolicy(parallel_step1=self.args.parallel_step1, count_encoding=self.args.count_encoding)
        schedule = full_budget(cfg, self.args.measurement_ns, policy)
        report = dispersive_report(cfg, schedule)

        numbers = schedule.durations()
        text = "\n".join([
            schedule.to_text(),
            "",
            f"t1 = {numbers['t1']:.3f} ns, t4 = {numbers['t4']:.3f} ns, "
            f"t3 = {numbers['t3']:.3f} ns, ts = {numbers['ts']:.3f} ns",
            f"|g/Delta| = {report['dispersive_ratio_1']:.4f}, {report['dispersive_ratio_2']:.4f}",
            f"T1 margin = {report['t1_margin_ns']:.2f} ns",
        ])
        manifest = self._manifest(config_path, cfg, measurement_ns=self.args.measurement_ns,
                                  policy=policy.model_dump())
        manifest.add_output(write_text(self.output_dir / "schedule.txt", text))
        manifest.add_output(write_json(self.output_dir / "schedule.json",
                                       {"schedule": schedule.to_record(), "dispersive": report}))
        self._finish(manifest, text)
        return 0

    def cmd_scan(self) -> int:
        config_path, cfg = self._load_config()
        method = ExtractionMethod.parse(self.args.method)
        result = chsh_scan(cfg, method=method, points=self.args.points, tie_primed=self.args.tie_primed)

        manifest = self._manifest(config_path, cfg, method=method.value, points=self.args.points,
                                  tie_primed=self.args.tie_primed)
        manifest.add_output(write_landscape(self.output_dir / "landscape.csv", result.landscape))
        manifest.add_output(write_text(self.output_dir / "scan_best.txt", result.best.to_text()))
        manifest.add_output(write_json(self.output_dir / "scan_best.json", result.best.to_record()))
        self._finish(manifest, result.best.to_text())
        return 0
