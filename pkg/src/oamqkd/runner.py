"""Experiment orchestration: config, derived parameters, Monte-Carlo loop, outputs.

A run evaluates n_realizations independent turbulence streams; each stream is
advanced by dt per frame (plus delay_frames of beacon-only warmup when loop
latency is enabled) and every scored frame yields one ExperimentRecord.  RNG
streams are keyed by (master_seed, realization, layer), so records.csv is
bit-identical for any worker count.

Outputs in the run directory:
  records.csv    i,t,Q_oam,Q_ang,Q,r_min,captured_energy,residues
  sweep.csv      axis,mean_Q,se_Q,mean_r,se_r           (sweep runs)
  crosstalk_*.csv per-realization and ensemble-mean transition matrices
  spectrum.csv   ensemble-mean azimuthal power spectra   (optional)
  run.json       resolved config, derived parameters, code version, seed
"""

from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .ao import (
    AOConfig,
    CorrectionHistory,
    beacon_phase,
    correct,
    greenwood_frequency,
    lit_residues,
    unwrap,
)
from .grid import ComplexField, Grid
from .modes import LGModeSpec, lg_field
from .propagation import ScreenStack, propagate
from .qkd import (
    CrosstalkMatrix,
    DegenerateRealization,
    ModalProjector,
    ProtocolConfig,
    build_mubs,
    crosstalk_pair,
    secret_key_rate,
)
from .turbulence import TurbulenceParams, write_screen
from .zernike import ZernikeBasis

K_FRIED = 0.423
K_RYTOV = 1.23


@dataclass
class OpticsConfig:
    wavelength: float = 632e-9
    w0: float = 0.03
    grid_n: int = 256
    grid_pitch: Optional[float] = None  # None -> 0.512 m extent / grid_n

    def grid(self) -> Grid:
        pitch = self.grid_pitch if self.grid_pitch else 0.512 / self.grid_n
        return Grid(self.grid_n, pitch)


@dataclass
class RunConfig:
    n_realizations: int = 100
    frames: int = 1
    dt: float = 1e-3
    master_seed: int = 12345
    workers: int = 1


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("records", "crosstalk")
    crosstalk_keep: int = 1
    spectrum: bool = False
    spectrum_halfwidth: Optional[int] = None


@dataclass
class ExperimentConfig:
    turbulence: TurbulenceParams = field(default_factory=TurbulenceParams)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    ao: AOConfig = field(default_factory=AOConfig)
    optics: OpticsConfig = field(default_factory=OpticsConfig)
    run: RunConfig = field(default_factory=RunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


def derived_params(cfg: ExperimentConfig) -> dict:
    """Fill the cn2/r0 conversion and report channel scales.

    Plane-wave conventions: r0 = (0.423 k^2 Cn2 z)^(-3/5) and Rytov variance
    sigma_R^2 = 1.23 Cn2 k^(7/6) z^(11/6).
    """
    t = cfg.turbulence
    k = 2.0 * math.pi / cfg.optics.wavelength
    if t.cn2 is not None and t.r0 is not None:
        implied = (K_FRIED * k**2 * t.cn2 * t.z) ** (-3.0 / 5.0)
        if not math.isclose(implied, t.r0, rel_tol=1e-6):
            raise ValueError(f"cn2 and r0 disagree: r0(cn2) = {implied:.6g}, r0 = {t.r0:.6g}")
    elif t.cn2 is None:
        t.cn2 = t.r0 ** (-5.0 / 3.0) / (K_FRIED * k**2 * t.z)
    else:
        t.r0 = (K_FRIED * k**2 * t.cn2 * t.z) ** (-3.0 / 5.0)

    sigma_r2 = K_RYTOV * t.cn2 * k ** (7.0 / 6.0) * t.z ** (11.0 / 6.0)
    cn2_unit = 1.0 / (K_RYTOV * k ** (7.0 / 6.0) * t.z ** (11.0 / 6.0))
    r0_at_sigma1 = (K_FRIED * k**2 * cn2_unit * t.z) ** (-3.0 / 5.0)
    f_g = greenwood_frequency(t.v, t.r0)
    grid = cfg.optics.grid()
    beacon = LGModeSpec(0, 0, cfg.optics.w0, cfg.optics.wavelength)
    return {
        "r0": t.r0,
        "cn2": t.cn2,
        "r0_layer": t.layer_r0(),
        "sigma_R2": sigma_r2,
        "r0_at_sigma1": r0_at_sigma1,
        "f_G": f_g,
        "tau_G": math.inf if f_g == 0 else 1.0 / f_g,
        "tau_AO": 1.0 / cfg.ao.f_ao,
        "delay_frames": cfg.ao.delay_frames,
        "w_z": beacon.waist(t.z),
        "grid_extent": grid.extent,
        "grid_pitch": grid.pitch,
    }


# ---------------------------------------------------------------------------
# simulation context and per-realization evaluation
# ---------------------------------------------------------------------------


class SimulationContext:
    """Read-only shared state for one experiment (safe across worker threads)."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.derived = derived_params(cfg)
        self.grid = cfg.optics.grid()
        opt, proto = cfg.optics, cfg.protocol

        if proto.R > 0.9 * self.grid.half_extent:
            raise ValueError(
                f"receiver aperture {proto.R} m reaches into the absorbing boundary "
                f"(limit {0.9 * self.grid.half_extent:.3g} m)"
            )
        specs, self.table = build_mubs(proto, opt.w0, opt.wavelength)
        self.inputs = [lg_field(s, self.grid, 0.0) for s in specs]
        # plane-wave probe filling the receiving aperture; its received phase
        # against the vacuum-propagated copy is the measured perturbation
        self.beacon_in = ComplexField(
            self.grid, 0.0, np.ones((self.grid.n, self.grid.n), dtype=np.complex128)
        )

        empty = ScreenStack(screens=[], z=cfg.turbulence.z)
        self.beacon_ref = propagate(self.beacon_in, empty, opt.wavelength)
        self.projector = ModalProjector(
            self.grid, cfg.turbulence.z, opt.w0, opt.wavelength, proto.l_values, proto.p_max, proto.R
        )

        r_corr = cfg.ao.R if cfg.ao.R is not None else min(proto.R, 0.85 * self.grid.half_extent)
        self.r_corr = r_corr
        self.zbasis = ZernikeBasis(self.grid, r_corr, cfg.ao.order)

        self.spectrum_projector = None
        if cfg.output.spectrum:
            half = cfg.output.spectrum_halfwidth or (proto.spacing * proto.L + 3)
            window = np.arange(-half, half + 1)
            self.spectrum_projector = ModalProjector(
                self.grid, cfg.turbulence.z, opt.w0, opt.wavelength, window, proto.p_max, proto.R
            )

    def warmup_frames(self) -> int:
        return self.cfg.ao.delay_frames


@dataclass
class ExperimentRecord:
    i: int
    t: float
    q_oam: float
    q_ang: float
    q: float
    r_min: float
    captured: np.ndarray
    residues: int

    def csv_row(self) -> str:
        return (
            f"{self.i},{self.t:.12g},{self.q_oam:.12g},{self.q_ang:.12g},{self.q:.12g},"
            f"{self.r_min:.12g},{float(np.mean(self.captured)):.12g},{self.residues}"
        )


RECORDS_HEADER = "i,t,Q_oam,Q_ang,Q,r_min,captured_energy,residues"


def simulate_realization(ctx: SimulationContext, i: int, ao_modes: Optional[list] = None) -> dict:
    """Evaluate one turbulence stream.

    Returns {mode: [ExperimentRecord ...]} plus crosstalk matrices and mean
    spectra for the context's configured mode.  Passing several ao_modes
    scores the same propagated fields under each correction branch (paired
    comparison at zero extra propagation cost).
    """
    cfg = ctx.cfg
    modes = list(ao_modes) if ao_modes is not None else [cfg.ao.mode]
    warmup = ctx.warmup_frames()
    stack = ScreenStack.build(ctx.grid, cfg.turbulence, cfg.run.master_seed, i)
    histories = {m: CorrectionHistory(cfg.ao.delay_frames) for m in modes}
    out = {m: [] for m in modes}
    xtalks = {m: [] for m in modes}
    spectra = []

    for frame in range(warmup + cfg.run.frames):
        stack.advance(cfg.run.dt)
        beacon = propagate(ctx.beacon_in, stack, cfg.optics.wavelength)
        wrapped, amplitude = beacon_phase(beacon, ctx.beacon_ref)
        residues = lit_residues(wrapped, np.where(ctx.projector.mask, amplitude, 0.0))
        meas = None
        for m in modes:
            if m == "none":
                continue
            if m == "ideal":
                histories[m].push(wrapped)
            else:
                if cfg.ao.unwrap:
                    if meas is None:
                        meas = unwrap(wrapped, amplitude)
                    surface = meas.unwrapped
                else:
                    surface = wrapped
                coeffs = ctx.zbasis.project(surface)
                histories[m].push(ctx.zbasis.reconstruct(coeffs))

        if frame < warmup:
            continue

        received = [propagate(f, stack, cfg.optics.wavelength) for f in ctx.inputs]
        scored = frame - warmup
        t = (i * cfg.run.frames + scored) * cfg.run.dt
        for m in modes:
            if m == "none":
                corrected = received
            else:
                phi_hat, ready = histories[m].delayed()
                corrected = received if not ready else [correct(f, phi_hat) for f in received]
            coeff_stack = np.stack([ctx.projector.coefficients(f) for f in corrected])
            try:
                oam, ang, captured = _crosstalk_with_capture(coeff_stack, ctx.table, cfg.protocol.l_values)
            except DegenerateRealization:
                continue
            oam.realization = ang.realization = i
            oam.t = ang.t = t
            q = 0.5 * (oam.qber() + ang.qber())
            out[m].append(
                ExperimentRecord(
                    i=i,
                    t=t,
                    q_oam=oam.qber(),
                    q_ang=ang.qber(),
                    q=q,
                    r_min=secret_key_rate(q, cfg.protocol.d),
                    captured=captured,
                    residues=residues,
                )
            )
            xtalks[m].append((oam, ang))
        if ctx.spectrum_projector is not None:
            lead = modes[0]
            if lead == "none":
                base = received
            else:
                phi_hat, ready = histories[lead].delayed()
                base = received if not ready else [correct(f, phi_hat) for f in received]
            spectra.append(
                np.stack([np.sum(np.abs(ctx.spectrum_projector.coefficients(f)) ** 2, axis=1) for f in base])
            )

    return {"records": out, "crosstalk": xtalks, "spectra": spectra}


def _crosstalk_with_capture(coeff_stack, table, l_values):
    raw = np.sum(np.abs(coeff_stack) ** 2, axis=2)
    captured = raw.sum(axis=1)
    oam, ang = crosstalk_pair(coeff_stack, table, l_values)
    return oam, ang, captured


# ---------------------------------------------------------------------------
# full runs, records io, summaries
# ---------------------------------------------------------------------------


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None) -> dict:
    """Execute the configured run, streaming records.csv and writing the manifest.

    A crashed run can be rerun with the same arguments: realizations already
    present in records.csv are skipped and the missing ones appended.
    """
    ctx = SimulationContext(cfg)
    out_dir = Path(out_dir if out_dir is not None else cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_manifest(ctx, out_dir)

    records_path = out_dir / "records.csv"
    done = set()
    if records_path.exists():
        for rec in read_records(records_path):
            done.add(int(rec["i"]))
    todo = [i for i in range(cfg.run.n_realizations) if i not in done]

    mode = cfg.ao.mode
    keep = cfg.output.crosstalk_keep if "crosstalk" in cfg.output.formats else 0
    mean_oam = mean_ang = None
    mean_spec = None
    n_mat = 0
    n_spec = 0

    with records_path.open("a") as fh:
        if records_path.stat().st_size == 0:
            fh.write(RECORDS_HEADER + "\n")
        workers = max(1, cfg.run.workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, result in zip(todo, pool.map(lambda j: simulate_realization(ctx, j), todo)):
                for rec in result["records"][mode]:
                    fh.write(rec.csv_row() + "\n")
                fh.flush()
                for frame_idx, (oam, ang) in enumerate(result["crosstalk"][mode]):
                    if mean_oam is None:
                        mean_oam = np.zeros_like(oam.values)
                        mean_ang = np.zeros_like(ang.values)
                    mean_oam += oam.values
                    mean_ang += ang.values
                    n_mat += 1
                    if i < keep and frame_idx == 0:
                        (out_dir / f"crosstalk_oam_r{i}.csv").write_text(oam.to_csv())
                        (out_dir / f"crosstalk_ang_r{i}.csv").write_text(ang.to_csv())
                for spec in result["spectra"]:
                    mean_spec = spec if mean_spec is None else mean_spec + spec
                    n_spec += 1

    if n_mat and "crosstalk" in cfg.output.formats:
        lv = cfg.protocol.l_values
        (out_dir / "crosstalk_oam_mean.csv").write_text(
            CrosstalkMatrix("OAM", mean_oam / n_mat, lv).to_csv()
        )
        (out_dir / "crosstalk_ang_mean.csv").write_text(
            CrosstalkMatrix("ANG", mean_ang / n_mat, lv).to_csv()
        )
    if n_spec and ctx.spectrum_projector is not None:
        _write_spectrum(out_dir / "spectrum.csv", mean_spec / n_spec, cfg, ctx)

    stats = summarize(list(read_records(records_path)))
    return stats


def _write_manifest(ctx: SimulationContext, out_dir: Path) -> None:
    cfg_dict = dataclasses.asdict(ctx.cfg)
    cfg_dict["ao"]["R_resolved"] = ctx.r_corr
    manifest = {
        "config": cfg_dict,
        "derived": ctx.derived,
        "version": __version__,
        "seed": ctx.cfg.run.master_seed,
    }
    (out_dir / "run.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_spectrum(path: Path, mean_spec: np.ndarray, cfg: ExperimentConfig, ctx: SimulationContext) -> None:
    window = ctx.spectrum_projector.l_values
    lines = ["# mean azimuthal power spectrum per input letter"]
    lines.append("l_in," + ",".join(str(int(l)) for l in window))
    for row_idx, l_in in enumerate(cfg.protocol.l_values):
        lines.append(f"{int(l_in)}," + ",".join(f"{x:.12g}" for x in mean_spec[row_idx]))
    path.write_text("\n".join(lines) + "\n")


def read_records(path) -> list:
    out = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            if not line.strip():
                continue
            vals = line.strip().split(",")
            out.append({k: float(v) for k, v in zip(header, vals)})
    return out


def summarize(records: list) -> dict:
    """Mean/SE of QBER and key rate plus a QBER histogram."""
    if not records:
        return {"n": 0}
    q = np.array([r["Q"] for r in records])
    r_min = np.array([r["r_min"] for r in records])
    counts, edges = np.histogram(q, bins=min(30, max(5, len(q) // 4)))
    se = lambda x: float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return {
        "n": len(records),
        "mean_Q": float(q.mean()),
        "se_Q": se(q),
        "mean_r": float(r_min.mean()),
        "se_r": se(r_min),
        "hist_counts": counts.tolist(),
        "hist_edges": edges.tolist(),
    }


SWEEP_AXES = ("r0", "Cn2", "N", "R", "v", "d")


def apply_sweep_value(cfg: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    """A deep-copied config with one sweep axis overridden."""
    new = dataclasses.replace(
        cfg,
        turbulence=dataclasses.replace(cfg.turbulence),
        protocol=dataclasses.replace(cfg.protocol),
        ao=dataclasses.replace(cfg.ao),
        optics=dataclasses.replace(cfg.optics),
        run=dataclasses.replace(cfg.run),
        output=dataclasses.replace(cfg.output),
    )
    if axis == "r0":
        new.turbulence.r0 = float(value)
        new.turbulence.cn2 = None
    elif axis == "Cn2":
        new.turbulence.cn2 = float(value)
        new.turbulence.r0 = None
    elif axis == "N":
        new.ao.order = int(value)
    elif axis == "R":
        new.protocol.R = float(value)
    elif axis == "v":
        new.turbulence.v = float(value)
    elif axis == "d":
        new.protocol.d = int(value)
    else:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    return new


def run_sweep(cfg: ExperimentConfig, axis: str, values: list, out_dir: Optional[Path] = None) -> list:
    """One sub-run per value; aggregates sweep.csv in the parent directory."""
    out_dir = Path(out_dir if out_dir is not None else cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for v in values:
        sub = apply_sweep_value(cfg, axis, v)
        stats = run_experiment(sub, out_dir / f"sweep_{axis}_{v:g}")
        rows.append((v, stats))
    lines = ["axis,mean_Q,se_Q,mean_r,se_r"]
    for v, s in rows:
        lines.append(f"{v:g},{s['mean_Q']:.12g},{s['se_Q']:.12g},{s['mean_r']:.12g},{s['se_r']:.12g}")
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    manifest = {
        "axis": axis,
        "values": [float(v) for v in values],
        "version": __version__,
        "seed": cfg.run.master_seed,
        "derived": derived_params(cfg),
        "config": dataclasses.asdict(cfg),
    }
    (out_dir / "run.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return rows


def dump_screens(cfg: ExperimentConfig, out_dir: Path, frames: int = 0) -> list:
    """Debug helper behind `oamqkd screens --dump`."""
    derived_params(cfg)
    grid = cfg.optics.grid()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stack = ScreenStack.build(grid, cfg.turbulence, cfg.run.master_seed, 0)
    paths = []
    for frame in range(frames + 1):
        if frame > 0:
            stack.advance(cfg.run.dt)
        for j, screen in enumerate(stack.screens):
            p = out_dir / f"screen_layer{j}_frame{frame}.bin"
            write_screen(p, screen)
            paths.append(p)
    return paths
