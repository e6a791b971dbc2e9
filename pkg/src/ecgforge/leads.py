"""Standard 12-lead geometry and projections.

Coordinate convention: x points to the patient's left, y points inferior
(toward the feet), z points anterior. The frontal plane is (x, y) with lead
angles measured from +x turning toward +y; the horizontal plane is (x, z)
with chest-lead angles measured from +x turning toward +z.

Limb leads are bipolar differences of electrode potentials, so II = I + III
holds identically; the augmented leads are referenced to the mean of the
other two limb potentials, so aVR + aVL + aVF = 0 holds identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .record import STANDARD_LEADS
from .validation import check_finite

FRONTAL_LEADS = ("I", "II", "III", "aVR", "aVL", "aVF")
CHEST_LEADS = ("V1", "V2", "V3", "V4", "V5", "V6")

# Hexaxial reference angles (degrees); a pictorial axis diagram pins only the
# ordering, these numeric values are the standard convention.
DEFAULT_FRONTAL_ANGLES = {
    "I": 0.0, "II": 60.0, "III": 120.0,
    "aVR": -150.0, "aVL": -30.0, "aVF": 90.0,
}
# Chest electrodes run from the right sternal edge around to the left
# axillary line; angles in the horizontal plane from the left-pointing axis.
DEFAULT_CHEST_ANGLES = {
    "V1": 120.0, "V2": 94.0, "V3": 82.0, "V4": 60.0, "V5": 30.0, "V6": 0.0,
}

_CLOSURE_TOL = 1e-9


def _unit(angle_deg):
    theta = np.deg2rad(angle_deg)
    return np.array([np.cos(theta), np.sin(theta)])


@dataclass(frozen=True)
class LimbPotentials:
    """Electrode potentials in millivolts (the right leg is ground)."""

    ra: object
    la: object
    ll: object

    def validated(self):
        return (
            check_finite(self.ra, "ra"),
            check_finite(self.la, "la"),
            check_finite(self.ll, "ll"),
        )


class LeadSystem:
    """The 12 standard lead axes as unit vectors with angles in degrees."""

    def __init__(self, frontal_angles=None, chest_angles=None):
        frontal = dict(DEFAULT_FRONTAL_ANGLES)
        if frontal_angles:
            frontal.update(frontal_angles)
        chest = dict(DEFAULT_CHEST_ANGLES)
        if chest_angles:
            chest.update(chest_angles)
        if set(frontal) != set(FRONTAL_LEADS):
            raise ConfigError(
                f"frontal angles must cover exactly {FRONTAL_LEADS}"
            )
        if set(chest) != set(CHEST_LEADS):
            raise ConfigError(f"chest angles must cover exactly {CHEST_LEADS}")

        self.frontal_angles_deg = {k: float(frontal[k]) for k in FRONTAL_LEADS}
        self.horizontal_angles_deg = {k: float(chest[k]) for k in CHEST_LEADS}
        self.frontal_axes = {
            k: _unit(v) for k, v in self.frontal_angles_deg.items()
        }
        self.horizontal_axes = {
            k: _unit(v) for k, v in self.horizontal_angles_deg.items()
        }
        self.lead_labels = STANDARD_LEADS

        closure = (
            self.frontal_axes["I"]
            + self.frontal_axes["III"]
            - self.frontal_axes["II"]
        )
        if np.linalg.norm(closure) > _CLOSURE_TOL:
            raise ConfigError(
                "frontal axes for I, II, III must satisfy II = I + III "
                f"(closure residual {np.linalg.norm(closure):.3e})"
            )

    def axis(self, lead):
        """Unit axis vector for ``lead`` in its plane (frontal or horizontal)."""
        if lead in self.frontal_axes:
            return self.frontal_axes[lead]
        if lead in self.horizontal_axes:
            return self.horizontal_axes[lead]
        raise KeyError(f"unknown lead label {lead!r}")

    def is_chest_lead(self, lead):
        return lead in self.horizontal_axes

    def electrode_vectors(self):
        """Frontal-plane electrode direction vectors for RA, LA, LL.

        Chosen so that LA - RA and LL - RA reproduce the lead I and II axis
        projections exactly and the three potentials sum to zero (central
        terminal at the center of the triangle). The vertices then form an
        equilateral triangle for the default geometry.
        """
        u1 = self.frontal_axes["I"]
        u2 = self.frontal_axes["II"]
        ra = -(u1 + u2) / 3.0
        return {"ra": ra, "la": ra + u1, "ll": ra + u2}

    def to_json(self):
        doc = {
            "frontal_angles_deg": self.frontal_angles_deg,
            "horizontal_angles_deg": self.horizontal_angles_deg,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(
            frontal_angles=doc.get("frontal_angles_deg"),
            chest_angles=doc.get("horizontal_angles_deg"),
        )

    def __eq__(self, other):
        if not isinstance(other, LeadSystem):
            return NotImplemented
        return (
            self.frontal_angles_deg == other.frontal_angles_deg
            and self.horizontal_angles_deg == other.horizontal_angles_deg
        )


def limb_leads_from_potentials(p: LimbPotentials):
    """Bipolar limb leads (I, II, III) from electrode potentials in mV.

    I = LA - RA, II = LL - RA, III = LL - LA, so I + III == II exactly.
    Accepts scalars or equally shaped arrays.
    """
    ra, la, ll = p.validated()
    return la - ra, ll - ra, ll - la


def augmented_from_potentials(p: LimbPotentials):
    """Augmented limb leads (aVR, aVL, aVF) in mV.

    Each electrode is taken against the mean of the other two, e.g.
    aVR = RA - (LA + LL)/2.
    """
    ra, la, ll = p.validated()
    avr = ra - (la + ll) / 2.0
    avl = la - (ra + ll) / 2.0
    avf = ll - (ra + la) / 2.0
    return avr, avl, avf


def project_dipole(d, sys: LeadSystem, lead):
    """Signed scalar projection of a 3-D dipole (mV) onto a lead's unit axis.

    Frontal leads see the (x, y) component, chest leads the (x, z) component.
    A dipole parallel to the axis projects to its magnitude, a perpendicular
    one to zero. ``d`` may be one vector (3,) or a stack (n, 3).
    """
    d = check_finite(d, "dipole")
    axis = sys.axis(lead)
    if sys.is_chest_lead(lead):
        planar = np.stack([d[..., 0], d[..., 2]], axis=-1)
    else:
        planar = d[..., :2]
    return planar @ axis


def einthoven_residual(rec):
    """Per-sample I + III - II in mV; a data-integrity diagnostic.

    Zero to machine precision on any record derived from limb potentials;
    grows with independent per-lead corruption.
    """
    for lead in ("I", "II", "III"):
        if not rec.has_lead(lead):
            raise ConfigError(f"record is missing lead {lead!r}")
    return rec.lead("I") + rec.lead("III") - rec.lead("II")
