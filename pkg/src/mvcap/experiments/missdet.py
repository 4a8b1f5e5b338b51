"""Miss-detection sensitivity sweep.

Reuses one captured session per seed and degrades its observations after
the fact: for each (rate, affected camera count) cell, every affected
camera's detection in every frame is dropped with the given probability,
then the frame is reconstructed again. Dropping after capture keeps the
underlying detections identical across cells, so the curves isolate the
effect of the misses themselves.

The reported re-projection error is measured against the full, undegraded
detections: a camera that missed cannot contribute to triangulation but its
held-out detection still scores the reconstruction, which is what makes the
error climb as views disappear.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from ..geometry import Skeleton2D
from ..sim import NetworkConfig, NoiseConfig, ScenarioConfig, run_session
from .artifacts import SessionArtifacts
from .reconstruct import run_reconstruction
from .report import write_csv, write_json


def missdet_base(camera_count: int = 6) -> ScenarioConfig:
    return ScenarioConfig(
        name="missdet",
        camera_count=camera_count,
        trigger_rate_hz=10.0,
        duration_s=1.4,
        image_width=320, image_height=240, focal_px=260.0,
        payload_kind="joints2d",
        noise=NoiseConfig(pixel_sigma_px=2.0),
        network=NetworkConfig(hop_latency_ms=2.0),
    )


@dataclass
class MissdetReport:
    rows: list            # (rate, affected, seed, mean_err, resolved_frac, aborts)
    curves: dict          # affected -> {rate: seed-averaged mean error}
    spearman: dict        # affected -> rho over rates
    aborts: int
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations


def _degrade(art: SessionArtifacts, rate: float, affected: int, rng):
    out = {}
    for t in art.trigger_ids():
        obs, _ = art.joints_for(t)
        frame = {}
        for c, skel in obs.items():
            if c < affected and rng.random() < rate:
                frame[c] = Skeleton2D.all_missing(skel.joint_count, t, c)
            else:
                frame[c] = skel
        out[t] = frame
    return out


def _heldout_error(art: SessionArtifacts, recon) -> float:
    """Mean reprojection error against the full (undegraded) detections."""
    from ..errors import EmptyEvaluation
    from ..geometry import Skeleton3D, reprojection_error

    errs = []
    for f in recon.frames:
        full_obs, _ = art.joints_for(f.trigger_id)
        cams = art.cameras_for(f.trigger_id)
        try:
            rep = reprojection_error(Skeleton3D(f.joints, f.trigger_id),
                                     full_obs, cams)
            errs.append(rep.mean_px)
        except EmptyEvaluation:
            continue
    return float(np.mean(errs)) if errs else float("nan")


def run_missdetection_sweep(rates=(0.0, 0.2, 0.4, 0.6),
                            affected_counts=(1, 2, 4),
                            seeds=(0, 1),
                            base: ScenarioConfig | None = None,
                            out_dir=None,
                            work_dir=None) -> MissdetReport:
    if any(r < 0 or r > 1 for r in rates):
        raise ValueError("rates must lie in [0, 1]")
    base = base or missdet_base()
    import tempfile

    work = work_dir or tempfile.mkdtemp(prefix="missdet_")
    rows = []
    aborts = 0
    curves: dict[int, dict[float, list]] = {
        k: {float(r): [] for r in rates} for k in affected_counts}

    for seed in seeds:
        session_dir = f"{work}/base_s{seed}"
        run_session(base, seed, session_dir)
        art = SessionArtifacts(session_dir)
        for affected in affected_counts:
            for rate in rates:
                rng = np.random.default_rng(
                    np.random.SeedSequence([seed, affected, int(rate * 1000)]))
                override = _degrade(art, float(rate), affected, rng)
                recon = run_reconstruction(session_dir,
                                           observations_override=override)
                err = _heldout_error(art, recon)
                frame_aborts = recon.aborted_frames
                aborts += frame_aborts
                resolved = np.mean([f.resolved for f in recon.frames])
                rows.append((float(rate), affected, seed, err,
                             resolved / art.joint_count, frame_aborts))
                curves[affected][float(rate)].append(err)

    mean_curves = {k: {r: float(np.mean(v)) for r, v in by_rate.items()}
                   for k, by_rate in curves.items()}
    spearman = {}
    violations = []
    for affected, by_rate in mean_curves.items():
        xs = sorted(by_rate)
        ys = [by_rate[x] for x in xs]
        rho = float(spearmanr(xs, ys).statistic) if len(xs) > 2 else 1.0
        spearman[affected] = rho
        if affected <= base.camera_count - 2 and rho < 0:
            violations.append(
                f"error not non-decreasing in rate for {affected} affected "
                f"cameras (rho={rho:.2f})")
    if aborts > 0:
        violations.append(f"{aborts} frames aborted")

    report = MissdetReport(rows, mean_curves, spearman, aborts, violations)
    if out_dir is not None:
        write_csv(f"{out_dir}/missdetection_sweep.csv",
                  ["rate", "affected_cameras", "seed", "mean_reproj_px",
                   "resolved_fraction", "aborted_frames"], rows)
        write_json(f"{out_dir}/missdetection_summary.json", {
            "curves": {str(k): v for k, v in mean_curves.items()},
            "spearman": {str(k): v for k, v in spearman.items()},
            "violations": violations,
            "passed": report.passed,
        })
    return report
