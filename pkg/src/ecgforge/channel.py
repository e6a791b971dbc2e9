"""Electrode / wire / amplifier channel model: clean mV in, ADC counts out.

Models contact-impedance-scaled interface noise, slowly wandering
polarization offsets, per-lead DC bias, amplifier rail clamping with a
post-saturation discharge step, and integer quantization.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .record import Event, EventLog
from .validation import UNITS_COUNTS, UNITS_MV, check_seed

ELECTRODE_KINDS = ("wet", "dry", "microneedle")
SCENARIOS = ("copper_film", "human_skin")

# Measured contact impedances (ohms) per electrode kind and test scenario.
CONTACT_IMPEDANCE_OHM = {
    ("wet", "human_skin"): 550.0,
    ("microneedle", "human_skin"): 600.0,
    ("dry", "human_skin"): 700.0,
    ("wet", "copper_film"): 10.0,
    ("microneedle", "copper_film"): 1.0,
    ("dry", "copper_film"): 0.1,
}

# Reference impedance for the interface-noise scaling law.
WET_SKIN_IMPEDANCE_OHM = CONTACT_IMPEDANCE_OHM[("wet", "human_skin")]

# Bench metadata for the chosen microneedle design point; carries no signal
# effect because no impedance-vs-geometry law is modeled.
MICRONEEDLE_GEOMETRY = {"radius_um": 500.0, "height_um": 600.0, "needles": 46}

# Fractional resistance growth per stretch cycle; the serpentine layout
# stretches far more gracefully than a straight run.
DEFAULT_GROWTH_RATE = {"s_shape": 2e-5, "linear": 5e-4}


@dataclass(frozen=True)
class ElectrodeSpec:
    """Electrode contact model for one lead."""

    kind: str = "microneedle"
    scenario: str = "human_skin"
    contact_impedance_ohm: float = None
    polarization_offset_mv: float = 0.0
    polarization_walk_step_mv: float = 0.0
    polarization_walk_bound_mv: float = 0.0

    def __post_init__(self):
        if self.kind not in ELECTRODE_KINDS:
            raise ConfigError(f"electrode kind must be one of {ELECTRODE_KINDS}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        if self.contact_impedance_ohm is None:
            object.__setattr__(
                self, "contact_impedance_ohm",
                CONTACT_IMPEDANCE_OHM[(self.kind, self.scenario)],
            )
        if self.contact_impedance_ohm <= 0:
            raise ConfigError("contact impedance must be positive")
        if self.polarization_walk_step_mv < 0 or self.polarization_walk_bound_mv < 0:
            raise ConfigError("polarization walk parameters must be >= 0")


@dataclass(frozen=True)
class WireSpec:
    """Fabric wire model: base resistance plus stretch-cycle growth."""

    shape: str = "s_shape"
    length_cm: float = 20.0
    base_resistance_ohm_per_10cm: float = 0.05
    stretch_cycles: int = 0
    resistance_growth_rate: float = None

    def __post_init__(self):
        if self.shape not in ("s_shape", "linear"):
            raise ConfigError("wire shape must be 's_shape' or 'linear'")
        if self.length_cm <= 0:
            raise ConfigError("wire length must be positive")
        if self.stretch_cycles < 0:
            raise ConfigError("stretch_cycles must be >= 0")
        if self.resistance_growth_rate is None:
            object.__setattr__(
                self, "resistance_growth_rate", DEFAULT_GROWTH_RATE[self.shape]
            )
        # The serpentine path must grow strictly slower than a straight one.
        if self.shape == "s_shape":
            if self.resistance_growth_rate >= DEFAULT_GROWTH_RATE["linear"]:
                raise ConfigError(
                    "s_shape growth rate must stay below the linear-path rate"
                )
        elif self.resistance_growth_rate <= DEFAULT_GROWTH_RATE["s_shape"]:
            raise ConfigError(
                "linear growth rate must exceed the s_shape rate"
            )


def wire_resistance(w: WireSpec):
    """Resistance in ohms after ``stretch_cycles`` wear cycles."""
    base = w.base_resistance_ohm_per_10cm * (w.length_cm / 10.0)
    return base * (1.0 + w.resistance_growth_rate) ** w.stretch_cycles


@dataclass(frozen=True)
class AmplifierSpec:
    """Front-end gain, rail clamping, discharge step, and ADC width."""

    gain_counts_per_mv: float = 1000.0
    rail_counts: float = 8_000_000.0
    discharge_jump_counts: float = 100_000.0
    adc_bits: int = 24
    dc_bias_counts: object = 0.0  # scalar, or {lead: counts}

    def __post_init__(self):
        if self.gain_counts_per_mv <= 0:
            raise ConfigError("amplifier gain must be positive")
        if self.rail_counts > 2 ** (self.adc_bits - 1):
            raise ConfigError(
                "rail_counts must not exceed the signed ADC range "
                f"(2^{self.adc_bits - 1})"
            )
        if self.discharge_jump_counts < 0:
            raise ConfigError("discharge_jump_counts must be >= 0")

    def bias_for(self, lead):
        if isinstance(self.dc_bias_counts, dict):
            return float(self.dc_bias_counts.get(lead, 0.0))
        return float(self.dc_bias_counts)


@dataclass(frozen=True)
class ChannelSpec:
    """Per-lead electrode + wire models and one shared amplifier."""

    electrodes: dict = field(default_factory=dict)  # lead -> ElectrodeSpec
    default_electrode: ElectrodeSpec = field(default_factory=ElectrodeSpec)
    wires: dict = field(default_factory=dict)  # lead -> WireSpec
    default_wire: WireSpec = field(default_factory=WireSpec)
    amplifier: AmplifierSpec = field(default_factory=AmplifierSpec)
    interface_noise_base_counts: float = 5.0

    def electrode_for(self, lead):
        return self.electrodes.get(lead, self.default_electrode)

    def wire_for(self, lead):
        return self.wires.get(lead, self.default_wire)

    def to_dict(self):
        def espec(e):
            return {
                "kind": e.kind,
                "scenario": e.scenario,
                "contact_impedance_ohm": e.contact_impedance_ohm,
                "polarization_offset_mv": e.polarization_offset_mv,
                "polarization_walk_step_mv": e.polarization_walk_step_mv,
                "polarization_walk_bound_mv": e.polarization_walk_bound_mv,
            }

        def wspec(w):
            return {
                "shape": w.shape,
                "length_cm": w.length_cm,
                "base_resistance_ohm_per_10cm": w.base_resistance_ohm_per_10cm,
                "stretch_cycles": w.stretch_cycles,
                "resistance_growth_rate": w.resistance_growth_rate,
            }

        return {
            "default_electrode": espec(self.default_electrode),
            "electrodes": {k: espec(v) for k, v in self.electrodes.items()},
            "default_wire": wspec(self.default_wire),
            "wires": {k: wspec(v) for k, v in self.wires.items()},
            "amplifier": {
                "gain_counts_per_mv": self.amplifier.gain_counts_per_mv,
                "rail_counts": self.amplifier.rail_counts,
                "discharge_jump_counts": self.amplifier.discharge_jump_counts,
                "adc_bits": self.amplifier.adc_bits,
                "dc_bias_counts": self.amplifier.dc_bias_counts,
            },
            "interface_noise_base_counts": self.interface_noise_base_counts,
        }

    @classmethod
    def from_dict(cls, doc):
        amp = doc.get("amplifier", {})
        return cls(
            default_electrode=ElectrodeSpec(**doc.get("default_electrode", {})),
            electrodes={
                k: ElectrodeSpec(**v)
                for k, v in doc.get("electrodes", {}).items()
            },
            default_wire=WireSpec(**doc.get("default_wire", {})),
            wires={k: WireSpec(**v) for k, v in doc.get("wires", {}).items()},
            amplifier=AmplifierSpec(**amp),
            interface_noise_base_counts=doc.get(
                "interface_noise_base_counts", 5.0
            ),
        )


def _bounded_walk(rng, n, step_mv, bound_mv):
    """Random walk folded back into [-bound, +bound] (triangle reflection)."""
    if step_mv == 0.0 or bound_mv == 0.0:
        return np.zeros(n)
    walk = np.cumsum(rng.normal(0.0, step_mv, n))
    period = 4.0 * bound_mv
    return bound_mv - np.abs(np.mod(walk + bound_mv, period) - 2.0 * bound_mv)


def _clamp_with_discharge(pre, rail, jump):
    """Sequentially clamp at the rails; each release subtracts a discharge step.

    Returns (output, saturation episodes as (start, end, sign), running
    offsets already folded into the output).
    """
    out = pre.copy()
    episodes = []
    if jump == 0.0 and not np.any(np.abs(pre) >= rail):
        return out, episodes
    offset = 0.0
    in_sat = False
    sign = 0
    start = 0
    for i in range(pre.shape[0]):
        v = pre[i] + offset
        if in_sat and abs(v) < rail:
            # release: accumulated charge dumps as a step against the rail
            episodes.append((start, i, sign))
            offset -= sign * jump
            v = pre[i] + offset
            in_sat = False
        if v >= rail:
            if not in_sat or sign < 0:
                start, sign, in_sat = i, 1, True
            out[i] = rail
        elif v <= -rail:
            if not in_sat or sign > 0:
                start, sign, in_sat = i, -1, True
            out[i] = -rail
        else:
            out[i] = v
    if in_sat:
        episodes.append((start, pre.shape[0], sign))
    return out, episodes


def apply_channel(rec, spec: ChannelSpec, seed):
    """Transform a mV record into quantized ADC counts.

    counts = clamp(gain * (mV + polarization) + dc_bias + noise, +/-rail),
    with interface-noise sigma scaling as sqrt(Z / Z_wet) and each saturation
    release followed by a discharge step. Deterministic per seed; leads are
    processed independently and the event log is merged by (sample, lead).
    """
    if rec.units != UNITS_MV:
        raise ConfigError(f"apply_channel expects a mV record, got {rec.units!r}")
    seed = check_seed(seed)
    amp = spec.amplifier
    children = np.random.SeedSequence(seed).spawn(rec.n_leads)

    rows = []
    tagged_events = []
    for i, label in enumerate(rec.lead_labels):
        rng = np.random.default_rng(children[i])
        electrode = spec.electrode_for(label)
        z_total = electrode.contact_impedance_ohm + wire_resistance(
            spec.wire_for(label)
        )
        sigma = spec.interface_noise_base_counts * np.sqrt(
            z_total / WET_SKIN_IMPEDANCE_OHM
        )
        polarization = electrode.polarization_offset_mv + _bounded_walk(
            rng, rec.n_samples,
            electrode.polarization_walk_step_mv,
            electrode.polarization_walk_bound_mv,
        )
        pre = amp.gain_counts_per_mv * (rec.data[i] + polarization)
        pre += amp.bias_for(label)
        if sigma > 0:
            pre += rng.normal(0.0, sigma, rec.n_samples)

        clamped, episodes = _clamp_with_discharge(
            pre, amp.rail_counts, amp.discharge_jump_counts
        )
        rows.append(np.clip(np.round(clamped), -amp.rail_counts, amp.rail_counts))
        for start, end, sign in episodes:
            tagged_events.append((start, i, Event(
                kind="saturation", source="injected",
                onset_sample=start, duration_samples=end - start,
                leads=(label,), params={"sign": sign},
            )))
            if end < rec.n_samples:
                tagged_events.append((end, i, Event(
                    kind="discharge", source="injected",
                    onset_sample=end, duration_samples=1,
                    leads=(label,),
                    params={"jump_counts": -sign * amp.discharge_jump_counts},
                )))

    log = EventLog(
        e for _, _, e in sorted(tagged_events, key=lambda t: (t[0], t[1]))
    )
    return rec.with_data(np.vstack(rows), units=UNITS_COUNTS), log


DcRange = namedtuple("DcRange", ["per_lead", "across_leads"])


def dc_range(rec):
    """Count span diagnostics: worst per-lead span and the all-lead span."""
    if rec.n_samples == 0:
        raise ConfigError("dc_range needs a non-empty record")
    spans = rec.data.max(axis=1) - rec.data.min(axis=1)
    return DcRange(
        per_lead=float(spans.max()),
        across_leads=float(rec.data.max() - rec.data.min()),
    )
