"""End-to-end runs and their serialized outputs.

Floats are written with ``repr`` (shortest round-trip form), so every
value in the CSV and JSON outputs parses back to the identical double.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .channel import apply_channel, bethe_report, design_concentration_filter
from .config import SCHEMA_VERSION, Config
from .experiment import (
    PAPER_VISIBILITY_AFTER,
    PAPER_VISIBILITY_BEFORE,
    CoincidenceMatrix,
    ScanCurve,
    ScanSetup,
    calibrate_noise,
    find_dip,
    mode_matrix,
    sample_counts,
    visibility,
)
from .optics import HologramSpec, displaced_projector
from .states import (
    PAPER_COEFFICIENTS,
    BipartitePureState,
    make_paper_state,
    schmidt_decompose,
)

SCAN_HEADER = ["displacement", "expected_prob", "expected_rate", "sampled_counts"]
MATRIX_HEADER = ["l_signal", "l_idler", "probability", "expected_rate"]


@dataclass
class Table:
    header: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _plain(obj: Any) -> Any:
    """Convert numpy scalars and arrays into JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


@dataclass
class ResultBundle:
    data: dict[str, Any]
    tables: dict[str, Table] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(_plain(self.data), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, table in self.tables.items():
            path = out / f"{name}.csv"
            path.write_text(table.to_csv(), newline="")
            written.append(path)
        path = out / "bundle.json"
        path.write_text(self.to_json(), newline="")
        written.append(path)
        return written


def metadata(config: Config) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config_hash": config.digest(),
        "rng_seed": config.run.rng_seed,
    }


def state_for(config: Config, which: str = "before") -> tuple[BipartitePureState, float]:
    """The pre-plate pair state, or its image under the configured channel."""
    before = make_paper_state("before_plate", config.spectrum)
    if which == "before":
        return before, 1.0
    if which == "after":
        return apply_channel(before, config.channel())
    raise ValueError(f"unknown state {which!r}")


def scan_setup(config: Config, state: BipartitePureState) -> ScanSetup:
    """Signal hologram fixed at its displacement; idler scans the opposite fork."""
    sp = config.signal_projector
    signal = displaced_projector(HologramSpec(sp.fork, displacement=sp.displacement), spectrum=config.spectrum)
    return ScanSetup(
        state=state,
        signal_projector=signal,
        idler_fork=-sp.fork,
        d_range=(config.scan.d_min, config.scan.d_max),
        n_points=config.scan.n_points,
    )


def scan_table(curve: ScanCurve, pair_rate: float) -> Table:
    table = Table(list(SCAN_HEADER))
    sampled = curve.sampled if curve.sampled is not None else [""] * len(curve.expected)
    for d, p, n in zip(curve.displacements, curve.expected, sampled):
        table.rows.append([float(d), float(p), float(p) * pair_rate, n if n == "" else int(n)])
    return table


def matrix_table(matrix: CoincidenceMatrix, pair_rate: float) -> Table:
    table = Table(list(MATRIX_HEADER))
    for l1 in matrix.spectrum.modes:
        for l2 in matrix.spectrum.modes:
            p = matrix.value(l1, l2)
            table.rows.append([l1, l2, p, p * pair_rate])
    return table


def describe_state(state: BipartitePureState) -> dict[str, Any]:
    report = schmidt_decompose(state)
    return {
        "amplitudes_real": state.amplitudes.real,
        "amplitudes_imag": state.amplitudes.imag,
        "pair_amplitudes": {f"{l},{-l}": state.amplitude(l, -l).real for l in state.spectrum.modes},
        "schmidt_coeffs": report.schmidt_coeffs,
        "entropy_nats": report.entropy_nats,
        "fidelity_max_ent": report.fidelity_max_ent,
    }


def filter_report(state: BipartitePureState, cap: float) -> dict[str, Any]:
    design = design_concentration_filter(state, cap)
    out, _ = apply_channel(state, design.channel())
    return {
        "acts_on": design.acts_on,
        "eta_cap": design.eta_cap,
        "eta": {str(l): float(e) for l, e in zip(state.spectrum.modes, design.eta)},
        "yield": design.yield_prob,
        "output_state": describe_state(out),
    }


def _scan_report(setup: ScanSetup, target_v: float, cfg, stream: int) -> tuple[dict[str, Any], ScanCurve]:
    ideal = setup.scan(0.0)
    eps = calibrate_noise(target_v, setup)
    noisy = sample_counts(setup.scan(eps), cfg, stream=stream)
    report = {
        "target_visibility": target_v,
        "epsilon": eps,
        "visibility_ideal": visibility(ideal),
        "visibility_expected": visibility(ScanCurve(noisy.displacements, noisy.expected)),
        "visibility_sampled": visibility(noisy),
        "dip_position": find_dip(noisy),
        "signal_projector": setup.signal_projector.amplitudes.real,
        "idler_fork": setup.idler_fork,
    }
    return report, noisy


def reproduce_paper(config: Config) -> ResultBundle:
    """Run the full chain from the pre-plate state to the concentration filter."""
    cfg = config.run_config()
    rate = config.run.pair_rate
    before, _ = state_for(config, "before")
    after, success = state_for(config, "after")

    paper_after = make_paper_state("after_plate", config.spectrum)
    deviation = float(np.max(np.abs(after.amplitudes - paper_after.amplitudes)))

    m_before = mode_matrix(before)
    m_after = mode_matrix(after)
    scan_before, curve_before = _scan_report(scan_setup(config, before), PAPER_VISIBILITY_BEFORE, cfg, 0)
    scan_after, curve_after = _scan_report(scan_setup(config, after), PAPER_VISIBILITY_AFTER, cfg, 1)

    raw_norms = {k: float(np.linalg.norm(list(v.values()))) for k, v in PAPER_COEFFICIENTS.items()}
    data = {
        "metadata": metadata(config),
        "config": config.to_dict(),
        "states": {
            "before": describe_state(before),
            "after": {**describe_state(after), "success_prob": success},
            "after_reported": describe_state(paper_after),
            "raw_norms": raw_norms,
            "after_max_abs_deviation": deviation,
        },
        "mode_matrices": {"before": m_before.values, "after": m_after.values},
        "scans": {"before": scan_before, "after": scan_after},
        "dip_shift": scan_after["dip_position"] - scan_before["dip_position"],
        "filter": filter_report(before, max(config.eta.values())),
        "bethe": bethe_report(),
    }
    tables = {
        "fig3_mode_matrix_before": matrix_table(m_before, rate),
        "fig4_scan_before": scan_table(curve_before, rate),
        "fig5_mode_matrix_after": matrix_table(m_after, rate),
        "fig6_scan_after": scan_table(curve_after, rate),
    }
    return ResultBundle(data, tables)


def run_scan(config: Config, which: str = "before") -> Table:
    """Plain grid scan at the configured noise level, with Poisson counts."""
    state, _ = state_for(config, which)
    curve = scan_setup(config, state).scan(config.epsilon_noise, refine=False)
    curve = sample_counts(curve, config.run_config())
    return scan_table(curve, config.run.pair_rate)


def run_mode_matrix(config: Config, which: str = "before") -> Table:
    state, _ = state_for(config, which)
    return matrix_table(mode_matrix(state), config.run.pair_rate)


def run_design_filter(config: Config, cap: float, which: str = "before") -> dict[str, Any]:
    state, _ = state_for(config, which)
    return {"metadata": metadata(config), "filter": filter_report(state, cap)}


def dumps_json(data: dict[str, Any]) -> str:
    return json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"


def table_names() -> Sequence[str]:
    return ("fig3_mode_matrix_before", "fig4_scan_before", "fig5_mode_matrix_after", "fig6_scan_after")
