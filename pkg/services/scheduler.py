"""Gate durations and the experiment-time budget.

All frequencies are angular (rad/ns) and all times in ns. The drive
frequency of each gate family comes from the device config.
"""
import math
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from config.device import DISPERSIVE_RATIO_LIMIT, DeviceConfig
from config.logging_config import get_logger
from utils.exceptions import ConfigurationError
from utils.units import to_ghz

logger = get_logger("services.scheduler")

COUPLING_MATCH_TOLERANCE = 0.01


def duration_rx(angle: float, cfg: DeviceConfig, omega_d: Optional[float] = None, qubit: int = 1) -> float:
    """Duration of rx(angle) driven off-resonantly through the resonator.

    t = -angle * Delta_r / (epsilon * g_q); rx(pi/4) is the Step-1 pulse.

    Args:
        angle: Rotation angle in radians
        cfg: Device parameters
        omega_d: Drive frequency, defaults to cfg.omega_d_rx
        qubit: Qubit the rotation acts on

    Returns:
        float: Duration in ns
    """
    omega_d = cfg.omega_d_rx if omega_d is None else omega_d
    delta_r = omega_d - cfg.omega_r
    if delta_r == 0:
        raise ConfigurationError("rx drive is resonant with the resonator (Delta_r = 0)")
    duration = -angle * delta_r / (cfg.epsilon * cfg.coupling(qubit))
    if not duration > 0:
        raise ConfigurationError(
            f"rx({angle:.4f}) on qubit {qubit} has non-positive duration {duration:.4f} ns; "
            f"the drive at {to_ghz(omega_d):.4f} GHz must be red-detuned from the resonator"
        )
    return duration


def duration_rz(cfg: DeviceConfig, omega_d: Optional[float] = None,
                angle: float = 3 * math.pi / 4, qubit: int = 1) -> float:
    """Duration of rz(angle) from the ac-Stark shift of a detuned drive.

    For angle = 3pi/4 this is t3 = 3 pi Delta_a / [2 (Delta_a + g^2/Delta_q) Delta_a + (2 eps g / Delta_r)^2],
    with Delta_a = omega_q - omega_d, Delta_q = omega_q - omega_r and
    Delta_r = omega_d - omega_r. Other angles scale linearly.
    """
    omega_d = cfg.omega_d_rz if omega_d is None else omega_d
    g = cfg.coupling(qubit)
    delta_a = cfg.qubit_frequency(qubit) - omega_d
    delta_q = cfg.qubit_detuning(qubit)
    delta_r = omega_d - cfg.omega_r
    if delta_r == 0:
        raise ConfigurationError("rz drive is resonant with the resonator (Delta_r = 0)")

    denominator = 2 * (delta_a + g ** 2 / delta_q) * delta_a + (2 * cfg.epsilon * g / delta_r) ** 2
    if not denominator > 0:
        raise ConfigurationError(f"rz duration denominator is {denominator!r}; choose another drive frequency")

    duration = 4 * angle * delta_a / denominator
    if not duration > 0:
        raise ConfigurationError(
            f"rz({angle:.4f}) on qubit {qubit} has non-positive duration {duration:.4f} ns"
        )
    return duration


def duration_iswap(cfg: DeviceConfig, delta: Optional[float] = None) -> float:
    """t_s = 3 pi Delta / (2 g^2) for the dispersive XY interaction."""
    delta = cfg.iswap_delta if delta is None else delta
    if not delta > 0:
        raise ConfigurationError(f"iSWAP detuning must be positive, got {delta!r} rad/ns")
    mismatch = abs(cfg.g_1 - cfg.g_2) / max(cfg.g_1, cfg.g_2)
    if mismatch > COUPLING_MATCH_TOLERANCE:
        raise ConfigurationError(
            f"iSWAP needs equal couplings; g_1 and g_2 differ by {mismatch:.2%}"
        )
    g = 0.5 * (cfg.g_1 + cfg.g_2)
    return 3 * math.pi * delta / (2 * g ** 2)


class BudgetPolicy(BaseModel):
    """How the gates of each segment are counted towards the experiment time.

    The defaults run the two Step-1 rotations one after the other, time every
    rotation with the physics of the qubit it acts on, and count four
    measurements (one per angle pair) for the CHSH test with the encoding
    rotations left out.
    """
    parallel_step1: bool = False
    per_qubit_physics: bool = True
    confirmation_measurements: int = Field(default=2, ge=0)
    chsh_measurements: int = Field(default=4, ge=0)
    count_encoding: bool = False
    encoding_angle: float = Field(default=math.pi / 4, gt=0)


class ScheduledGate(BaseModel):
    segment: str
    gate: str
    qubit: Optional[int] = None
    omega_d: Optional[float] = None
    duration_ns: float = Field(ge=0)


class PulseSchedule(BaseModel):
    """Ordered gate list with per-segment totals and the coherence comparison."""
    steps: List[ScheduledGate]
    generation_ns: float
    confirmation_ns: float
    chsh_test_ns: float
    total_ns: float
    t1_relax_ns: float
    t2_dephase_ns: float
    margin_ns: float
    feasible: bool
    policy: BudgetPolicy

    def segment_total(self, segment: str) -> float:
        return sum(step.duration_ns for step in self.steps if step.segment == segment)

    def durations(self) -> Dict[str, float]:
        """The headline numbers: t1, t4, t3, ts and the segment totals."""
        first = {}
        for step in self.steps:
            first.setdefault(step.gate, step.duration_ns)
        return {
            "t1": first.get("rx(pi/4)", 0.0),
            "t4": first.get("rx(3pi/4)", 0.0),
            "t3": first.get("rz(3pi/4)", 0.0),
            "ts": first.get("iswap", 0.0),
            "generation": self.generation_ns,
            "confirmation": self.confirmation_ns,
            "chsh_test": self.chsh_test_ns,
            "total": self.total_ns,
        }

    def to_record(self) -> Dict:
        return self.model_dump()

    def to_text(self) -> str:
        lines = ["Pulse schedule", ""]
        lines.append(f"{'segment':<14}{'gate':<18}{'qubit':>6}{'omega_d/2pi (GHz)':>20}{'duration (ns)':>16}")
        for step in self.steps:
            qubit = "-" if step.qubit is None else str(step.qubit)
            drive = "-" if step.omega_d is None else f"{to_ghz(step.omega_d):.4f}"
            lines.append(f"{step.segment:<14}{step.gate:<18}{qubit:>6}{drive:>20}{step.duration_ns:>16.4f}")
        lines.append("")
        lines.append(f"generation    {self.generation_ns:10.2f} ns")
        lines.append(f"confirmation  {self.confirmation_ns:10.2f} ns")
        lines.append(f"chsh test     {self.chsh_test_ns:10.2f} ns")
        lines.append(f"total         {self.total_ns:10.2f} ns")
        lines.append(f"T2            {self.t2_dephase_ns:10.2f} ns (margin {self.margin_ns:.2f} ns)")
        lines.append(f"verdict: {'feasible' if self.feasible else 'infeasible'}")
        return "\n".join(lines)


class PulseScheduler:
    """Composes the generation, confirmation and CHSH-test segments for one device."""

    def __init__(self, cfg: DeviceConfig, policy: Optional[BudgetPolicy] = None):
        self.cfg = cfg
        self.policy = policy or BudgetPolicy()

    def _qubit(self, qubit: int) -> int:
        return qubit if self.policy.per_qubit_physics else 1

    def _rx(self, segment: str, name: str, angle: float, qubit: int) -> ScheduledGate:
        return ScheduledGate(
            segment=segment, gate=name, qubit=qubit, omega_d=self.cfg.omega_d_rx,
            duration_ns=duration_rx(angle, self.cfg, self.cfg.omega_d_rx, self._qubit(qubit)),
        )

    def _rz(self, segment: str, name: str, angle: float, qubit: int) -> ScheduledGate:
        return ScheduledGate(
            segment=segment, gate=name, qubit=qubit, omega_d=self.cfg.omega_d_rz,
            duration_ns=duration_rz(self.cfg, self.cfg.omega_d_rz, angle, self._qubit(qubit)),
        )

    def _measurements(self, segment: str, count: int, measurement_ns: float) -> List[ScheduledGate]:
        return [
            ScheduledGate(segment=segment, gate="measure", duration_ns=measurement_ns)
            for _ in range(count)
        ]

    def generation(self) -> List[ScheduledGate]:
        """rx(pi/4) on both qubits, iSWAP, then ry(3pi/4) = rx(pi/4) rz(3pi/4) rx(3pi/4) on qubit 1."""
        quarter = math.pi / 4
        step1 = [self._rx("generation", "rx(pi/4)", quarter, qubit) for qubit in (1, 2)]
        if self.policy.parallel_step1:
            longest = max(step1, key=lambda step: step.duration_ns)
            step1 = [longest.model_copy(update={"qubit": None, "gate": "rx(pi/4) x2"})]
        iswap_step = ScheduledGate(segment="generation", gate="iswap", duration_ns=duration_iswap(self.cfg))
        ry_step = [
            self._rx("generation", "rx(pi/4)", quarter, 1),
            self._rz("generation", "rz(3pi/4)", 3 * quarter, 1),
            self._rx("generation", "rx(3pi/4)", 3 * quarter, 1),
        ]
        return step1 + [iswap_step] + ry_step

    def confirmation(self, measurement_ns: float) -> List[ScheduledGate]:
        """ry(pi/4) = rz(pi/4) rx(3pi/4) rz(3pi/4) on each qubit, then the measurements."""
        quarter = math.pi / 4
        steps = []
        for qubit in (1, 2):
            steps.extend([
                self._rz("confirmation", "rz(pi/4)", quarter, qubit),
                self._rx("confirmation", "rx(3pi/4)", 3 * quarter, qubit),
                self._rz("confirmation", "rz(3pi/4)", 3 * quarter, qubit),
            ])
        return steps + self._measurements("confirmation", self.policy.confirmation_measurements, measurement_ns)

    def chsh_test(self, measurement_ns: float) -> List[ScheduledGate]:
        steps = []
        if self.policy.count_encoding:
            # rz(theta/2) rx(pi/4) rz(-theta/2) per qubit and angle pair
            half = self.policy.encoding_angle / 2
            for _ in range(self.policy.chsh_measurements):
                for qubit in (1, 2):
                    steps.extend([
                        self._rz("chsh_test", "rz(theta/2)", half, qubit),
                        self._rx("chsh_test", "rx(pi/4)", math.pi / 4, qubit),
                        self._rz("chsh_test", "rz(-theta/2)", half, qubit),
                    ])
        return steps + self._measurements("chsh_test", self.policy.chsh_measurements, measurement_ns)

    def build(self, measurement_ns: Optional[float] = None) -> PulseSchedule:
        measurement_ns = self.cfg.measurement_ns if measurement_ns is None else measurement_ns
        if measurement_ns < 0:
            raise ConfigurationError(f"Measurement time must be nonnegative, got {measurement_ns!r} ns")

        try:
            steps = self.generation() + self.confirmation(measurement_ns) + self.chsh_test(measurement_ns)
        except ConfigurationError as e:
            logger.error(
                "Failed to build pulse schedule",
                extra={"error_details": {"error": str(e), "policy": self.policy.model_dump()}}
            )
            raise

        totals = {
            segment: sum(step.duration_ns for step in steps if step.segment == segment)
            for segment in ("generation", "confirmation", "chsh_test")
        }
        total = totals["generation"] + totals["confirmation"] + totals["chsh_test"]
        margin = self.cfg.t2_dephase - total
        schedule = PulseSchedule(
            steps=steps,
            generation_ns=totals["generation"],
            confirmation_ns=totals["confirmation"],
            chsh_test_ns=totals["chsh_test"],
            total_ns=total,
            t1_relax_ns=self.cfg.t1_relax,
            t2_dephase_ns=self.cfg.t2_dephase,
            margin_ns=margin,
            feasible=total < self.cfg.t2_dephase,
            policy=self.policy,
        )

        if not schedule.feasible:
            logger.warning(
                f"Experiment time {total:.1f} ns exceeds T2 = {self.cfg.t2_dephase:.1f} ns",
                extra={"schedule_details": schedule.durations()}
            )
        else:
            logger.info("Built pulse schedule", extra={"schedule_details": schedule.durations()})
        return schedule


def full_budget(cfg: DeviceConfig, measurement_ns: Optional[float] = None,
                policy: Optional[BudgetPolicy] = None) -> PulseSchedule:
    """Total experiment time under a composition policy, compared against T2.

    Args:
        cfg: Device parameters
        measurement_ns: Time per measurement, defaults to cfg.measurement_ns
        policy: Composition policy, defaults to BudgetPolicy()

    Returns:
        PulseSchedule: Gate list, segment totals and feasibility verdict
    """
    return PulseScheduler(cfg, policy).build(measurement_ns)


def dispersive_report(cfg: DeviceConfig, schedule: Optional[PulseSchedule] = None) -> Dict:
    """Dispersive-regime ratios and the coherence comparison against T1 and T2."""
    schedule = schedule or full_budget(cfg)
    ratio_1, ratio_2 = cfg.dispersive_ratios()
    return {
        "dispersive_ratio_1": ratio_1,
        "dispersive_ratio_2": ratio_2,
        "dispersive_ok": max(ratio_1, ratio_2) < DISPERSIVE_RATIO_LIMIT,
        "total_ns": schedule.total_ns,
        "t1_relax_ns": cfg.t1_relax,
        "t2_dephase_ns": cfg.t2_dephase,
        "t1_margin_ns": cfg.t1_relax - schedule.total_ns,
        "t2_margin_ns": cfg.t2_dephase - schedule.total_ns,
        "feasible": schedule.feasible,
    }
