"""Analytic hardware model: compute speed, footprint, power, and the
derived efficiency (TOPS/W) and density (TOPS/mm^2) figures of merit.

All internal computation is in SI units; unit conversions (TOPS, mm^2)
happen only when a report is formatted.  One MAC counts as 2 operations.

Power model grouping: a per-node receiver term scaled by the combined
quantum efficiency, one shared modulator term, and a per-node ADC term,
all multiplied by the wavelength count:

    P = W * [ N * h_nu * max(2^(2*Nb+1), Cd*Vr/e) * PR / (n^2 * eta)
              + E_mod * Nb * PR
              + N * E_adc * Nb * PR / n^2 ]
"""

from __future__ import annotations

from dataclasses import dataclass

PLANCK = 6.62607015e-34  # J*s
LIGHT_SPEED = 299792458.0  # m/s
ELECTRON_CHARGE = 1.602176634e-19  # C

# External systems quoted in the comparison table; reference constants,
# not modeled.  Fields: clock GHz, MNIST accuracy %, TOPS/W, TOPS/mm^2.
REFERENCE_SYSTEMS = (
    {"name": "Nvidia Tesla P40", "clock_ghz": 1.3, "accuracy_pct": 99.0,
     "tops_per_w": 0.19, "tops_per_mm2": 0.1},
    {"name": "DEAP", "clock_ghz": 128.0, "accuracy_pct": 97.6,
     "tops_per_w": 3.42, "tops_per_mm2": None},
    {"name": "Photonic tensor core", "clock_ghz": 128.0, "accuracy_pct": 96.1,
     "tops_per_w": 0.18, "tops_per_mm2": 284.0},
)

# Minimum optical input power per slicing node quoted for the 4x4 /
# 128 GSa/s operating point; a reported constant with no stated formula.
REPORTED_MIN_INPUT_POWER_PER_NODE_W = 100e-6


def photon_energy(wavelength_m: float) -> float:
    return PLANCK * LIGHT_SPEED / wavelength_m


@dataclass(frozen=True)
class HardwareSpec:
    wavelengths: int = 1  # W
    patch_edge: int = 4  # n
    nodes: int = 10  # N
    pixel_rate_hz: float = 128e9  # PR
    ring_radius_m: float = 108e-6  # R
    node_spacing_m: float = 10e-6  # delta h

    def __post_init__(self):
        if min(self.wavelengths, self.patch_edge) < 1 or self.nodes < 0:
            raise ValueError("counts must be positive (nodes may be 0)")
        if self.pixel_rate_hz <= 0 or self.ring_radius_m <= 0 or self.node_spacing_m < 0:
            raise ValueError("physical dimensions must be positive")


@dataclass(frozen=True)
class PowerModelParams:
    photon_energy_j: float = photon_energy(1550e-9)  # h*nu
    bit_precision: int = 5  # N_b
    # default C_d chosen so C_d*V_r/e stays below 2^(2*Nb+1) at Nb = 5
    pd_capacitance_f: float = 1e-16  # C_d
    pd_voltage_v: float = 1.0  # V_r
    mod_energy_j_per_bit: float = 1e-12  # E_mod
    adc_energy_j_per_bit: float = 2e-12  # E_ADC
    eta_laser: float = 0.1
    eta_mrr: float = 0.45
    eta_pd: float = 0.1

    def __post_init__(self):
        for eta in (self.eta_laser, self.eta_mrr, self.eta_pd):
            if not 0 < eta <= 1:
                raise ValueError("efficiencies must lie in (0, 1]")
        if min(self.photon_energy_j, self.bit_precision, self.pd_capacitance_f,
               self.pd_voltage_v) <= 0:
            raise ValueError("power model parameters must be positive")

    @property
    def eta(self) -> float:
        return self.eta_laser * self.eta_mrr * self.eta_pd


@dataclass(frozen=True)
class MetricsReport:
    compute_speed_macs: float  # MAC/s
    compute_speed_ops: float  # op/s, = 2 * MACs
    footprint_m2: float
    power_w: float
    efficiency_tops_per_w: float
    density_tops_per_mm2: float
    receiver_branch: str  # which max() branch fired in the power model

    def as_row(self) -> dict:
        return {
            "compute_speed_tmacs": self.compute_speed_macs / 1e12,
            "compute_speed_tops": self.compute_speed_ops / 1e12,
            "footprint_mm2": self.footprint_m2 * 1e6,
            "power_w": self.power_w,
            "efficiency_tops_per_w": self.efficiency_tops_per_w,
            "density_tops_per_mm2": self.density_tops_per_mm2,
            "receiver_branch": self.receiver_branch,
        }


def compute_speed(spec: HardwareSpec) -> float:
    """MAC/s: W * n^2 * N * PR."""
    return spec.wavelengths * spec.patch_edge**2 * spec.nodes * spec.pixel_rate_hz


def footprint(spec: HardwareSpec) -> float:
    """Occupied area in m^2: (4.4*R) * N * (4.4*R + delta_h)."""
    side = 4.4 * spec.ring_radius_m
    return side * spec.nodes * (side + spec.node_spacing_m)


def power(spec: HardwareSpec, pm: PowerModelParams) -> tuple[float, str]:
    """Total consumption in watts plus the active receiver max() branch."""
    quantizer_term = 2.0 ** (2 * pm.bit_precision + 1)
    charge_term = pm.pd_capacitance_f * pm.pd_voltage_v / ELECTRON_CHARGE
    branch = "2^(2Nb+1)" if quantizer_term >= charge_term else "Cd*Vr/e"
    n2 = spec.patch_edge**2
    pr = spec.pixel_rate_hz
    receiver = (
        spec.nodes * pm.photon_energy_j * max(quantizer_term, charge_term)
        * pr / (n2 * pm.eta)
    )
    modulator = pm.mod_energy_j_per_bit * pm.bit_precision * pr
    adc = spec.nodes * pm.adc_energy_j_per_bit * pm.bit_precision * pr / n2
    return spec.wavelengths * (receiver + modulator + adc), branch


def derived_figures(spec: HardwareSpec, pm: PowerModelParams) -> MetricsReport:
    """Full report: speed, footprint, power, efficiency, density."""
    macs = compute_speed(spec)
    ops = 2 * macs
    area = footprint(spec)
    watts, branch = power(spec, pm)
    if watts <= 0 or area <= 0:
        raise ValueError("power and footprint must be positive for derived figures")
    return MetricsReport(
        compute_speed_macs=macs,
        compute_speed_ops=ops,
        footprint_m2=area,
        power_w=watts,
        efficiency_tops_per_w=(ops / 1e12) / watts,
        density_tops_per_mm2=(ops / 1e12) / (area * 1e6),
        receiver_branch=branch,
    )
