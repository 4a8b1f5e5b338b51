from ..sim.session import run_session
from .artifacts import SessionArtifacts
from .freq_sweep import (
    run_frequency_sweep,
    sweep_base,
    transport_model_comparison,
)
from .missdet import missdet_base, run_missdetection_sweep
from .reconstruct import ReconstructionResult, run_reconstruction
from .report import write_csv, write_json
from .sync_compare import SyncComparison, comparison_base, run_sync_comparison
from .volumetric import VolumetricResult, run_volumetric
